#include "qp/commands.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

#include "qp/errors.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/multiscale.hpp"
#include "qp/perturb.hpp"
#include "qp/wavefunction.hpp"

namespace qp {

namespace {

void check_level(int level) {
  if (level != 1 && level != 2) throw ConfigError("level must be 1 or 2");
}

Vec2 along(double phi) { return {std::cos(phi), std::sin(phi)}; }

// Everything needed to evaluate at (k, phi): the level-one radius and, at level two, the block projector.
struct Point {
  PotentialSpec spec;
  Profile profile;
  double kappa1 = 0.0;
  LevelTwoSetup setup;
};

Point prepare(const RunConfig& cfg, int level, double k, double phi) {
  check_level(level);
  Point p{cfg.potential(), resolve(cfg.profile, k), 0.0, {}};
  if (in_O1(phi, k, cfg.params, p.profile)) throw ResonantBase("phi is in the step-one resonant set at this k");
  const LevelInputs in{&p.spec, &cfg.params, &p.profile, nullptr};
  p.kappa1 = solve_radius(1, k * k, phi, in).kappa;
  if (level == 2) {
    p.setup = level_two_setup(phi, k, p.kappa1, p.spec, cfg.params, p.profile);
    if (!p.setup.pole_free) throw NonConvergent("a block pole lies inside the level-two disc at this phi");
  }
  return p;
}

}  // namespace

void run_curve(const RunConfig& cfg, int level, double lambda, int grid, const std::string& out) {
  check_level(level);
  if (!(lambda > 1.0) || grid <= 0) throw ConfigError("curve needs lambda > 1 and a positive grid");
  const auto spec = cfg.potential();
  const auto profile = resolve(cfg.profile, std::sqrt(lambda));
  const auto c1 = trace_curve1(lambda, uniform_phi_grid(grid), spec, cfg.params, profile);
  export_curve(level == 1 ? c1 : trace_curve2(c1, spec, cfg.params, profile), out);
}

void run_regions(const RunConfig& cfg, double k, double phi, const std::string& out) {
  const auto p = prepare(cfg, 1, k, phi);
  const auto m2 = build_M2set(phi, k, p.kappa1, p.spec, cfg.params, p.profile);
  const auto map = region_map(m2, k, cfg.params, p.spec, p.profile);
  std::mt19937_64 rng(cfg.seed);
  const auto& box = box_cached(p.profile.R3);
  std::vector<LatticeIndex> centers;
  for (int i = 0; i < cfg.verify.counting_centers; ++i)
    centers.push_back(box[std::uniform_int_distribution<std::size_t>(0, box.size() - 1)(rng)]);
  const auto stats = region_stats(map, m2, centers, p.profile);
  std::ofstream f(out);
  if (!f) throw IoError("cannot open " + out);
  f << regions_json(map, stats, check_separations(map, p.profile), boundary_check(map, p.spec)) << '\n';
  if (!f) throw IoError("write failed for " + out);
}

std::string run_eigen(const RunConfig& cfg, int level, double k, double phi) {
  const auto p = prepare(cfg, level, k, phi);
  const LevelInputs in{&p.spec, &cfg.params, &p.profile, level == 2 ? &p.setup.P : nullptr};
  SeriesOptions opts;
  opts.check_oracle = true;
  const auto r = eigenvalue_level(level, p.kappa1 * along(phi), in, opts);
  nlohmann::ordered_json j;
  j["level"] = level;
  j["k"] = k;
  j["phi"] = phi;
  j["kappa"] = p.kappa1;
  j["lambda"] = r.lambda;
  j["oracle_lambda"] = r.oracle_lambda ? *r.oracle_lambda : std::nan("");
  j["oracle_count"] = r.oracle_count;
  j["tail"] = r.tail;
  j["orders"] = r.orders;
  j["converged"] = r.converged;
  j["g"] = r.g;
  return j.dump();
}

void run_wavefunction(const RunConfig& cfg, int level, double k, double phi, int grid, const std::string& out) {
  if (grid <= 0) throw ConfigError("grid must be positive");
  const auto p = prepare(cfg, level, k, phi);
  const Vec2 kappa = p.kappa1 * along(phi);
  const LevelInputs in1{&p.spec, &cfg.params, &p.profile, nullptr};
  const auto w1 = synthesize(1, kappa, in1);
  if (level == 1) {
    export_sample_csv(sample(w1, plane_wave(kappa), cfg.params, grid), out);
    return;
  }
  const LevelInputs in2{&p.spec, &cfg.params, &p.profile, &p.setup.P};
  export_sample_csv(sample(synthesize(2, kappa, in2), w1, cfg.params, grid), out);
}

}  // namespace qp
