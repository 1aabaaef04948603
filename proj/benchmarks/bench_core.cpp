#include <cmath>

#include <benchmark/benchmark.h>

#include "qp/fiber.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/lattice.hpp"
#include "qp/perturb.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"
#include "qp/resonance.hpp"

namespace {

struct Setup {
  qp::QPParams params = qp::QPParams::sqrt2_minus_1();
  qp::PotentialSpec spec = qp::build({{qp::LatticeIndex::make(1, 0, 0, 0), {0.08, 0.0}},
                                      {qp::LatticeIndex::make(0, 0, 0, 1), {0.06, 0.0}}},
                                     4, params);
  qp::ProfileSpec ps;

  Setup() {
    ps.step1_threshold = qp::Scaling{0.4, 0.5};
    ps.step2_threshold = qp::Scaling{0.5, 0.2};
    ps.box_radius = 1;
    ps.tilde_factor = 2;
    ps.level2_radius = 4;
    ps.level3_radius = 8;
    ps.o2_disc = qp::Scaling{5e-4, -0.5};
    ps.m2_disc = qp::Scaling{5e-4, -0.5};
    ps.simple_threshold = qp::Scaling{0.5, 0.0};
    ps.simple_radius = 1;
    ps.black_box = 2;
    ps.black_count = 2;
    ps.black_radius = 2;
    ps.grey_box = 2;
    ps.grey_count = 1;
    ps.white_radius = 1;
  }

  // An angle outside the step-one resonant set.
  double admissible_phi(double k, const qp::Profile& pr) const {
    const auto om = qp::build_omega1(k, params, pr);
    const auto& iv = om.omega.intervals().front();
    return 0.5 * (iv.lo + iv.hi);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_EnumerateBox(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qp::enumerate_box(r));
}
BENCHMARK(BM_EnumerateBox)->Arg(2)->Arg(4)->Arg(8);

void BM_Assemble(benchmark::State& state) {
  const auto& s = setup();
  const auto& box = qp::box_cached(static_cast<int>(state.range(0)));
  const qp::Vec2 kappa{11.0, 7.0};
  for (auto _ : state) benchmark::DoNotOptimize(qp::assemble(kappa, box, s.spec, s.params));
  state.counters["dim"] = static_cast<double>(box.size());
}
BENCHMARK(BM_Assemble)->Arg(2)->Arg(3)->Arg(4);

void BM_OracleEigen(benchmark::State& state) {
  const auto& s = setup();
  const auto M = qp::assemble({11.0, 7.0}, qp::box_cached(static_cast<int>(state.range(0))), s.spec, s.params);
  for (auto _ : state) benchmark::DoNotOptimize(qp::eig_oracle(M, false));
  state.counters["dim"] = static_cast<double>(M.H.rows());
}
BENCHMARK(BM_OracleEigen)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LevelOneEigenvalue(benchmark::State& state) {
  const auto& s = setup();
  const double k = static_cast<double>(state.range(0));
  const auto pr = qp::resolve(s.ps, k);
  const double phi = s.admissible_phi(k, pr);
  const qp::LevelInputs in{&s.spec, &s.params, &pr, nullptr};
  const qp::Vec2 kappa{k * std::cos(phi), k * std::sin(phi)};
  for (auto _ : state) benchmark::DoNotOptimize(qp::eigenvalue_level(1, kappa, in));
}
BENCHMARK(BM_LevelOneEigenvalue)->Arg(15)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_SolveRadius(benchmark::State& state) {
  const auto& s = setup();
  const double k = static_cast<double>(state.range(0));
  const auto pr = qp::resolve(s.ps, k);
  const double phi = s.admissible_phi(k, pr);
  const qp::LevelInputs in{&s.spec, &s.params, &pr, nullptr};
  for (auto _ : state) benchmark::DoNotOptimize(qp::solve_radius(1, k * k, phi, in));
}
BENCHMARK(BM_SolveRadius)->Arg(15)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_Omega1(benchmark::State& state) {
  const auto& s = setup();
  const double k = static_cast<double>(state.range(0));
  const auto pr = qp::resolve(s.ps, k);
  for (auto _ : state) benchmark::DoNotOptimize(qp::build_omega1(k, s.params, pr));
}
BENCHMARK(BM_Omega1)->Arg(15)->Arg(60)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
