#include <cmath>
#include <numbers>

#include "doctest.h"

#include "fixture.hpp"
#include "qp/band1d.hpp"
#include "qp/errors.hpp"
#include "qp/fiber.hpp"
#include "qp/perturb.hpp"

using namespace qp;

TEST_CASE("periodic section entries") {
  qpt::Desk d;
  const auto q = LatticeIndex::make(1, 0, 0, 0);
  const double p = 2.0 * std::numbers::pi, t = 0.3;
  const auto H = assemble_periodic(q, t, 5, d.spec, d.params);
  REQUIRE(H.rows() == 11);
  for (int i = 0; i < 11; ++i) {
    const double x = t + (i - 5) * p;
    CHECK(H(i, i).real() == doctest::Approx(x * x).epsilon(1e-14));
    for (int j = 0; j < 11; ++j)
      if (i != j) CHECK(H(i, j) == coefficient(d.spec, (i - j) * q));
  }
  CHECK((assemble_window(q, t, -5, 5, d.spec, d.params) - H).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble_periodic(q, t, 5, d.free, d.params), NotGenerator);
  CHECK_THROWS_AS(assemble_periodic(LatticeIndex::make(0, 1, 0, 0), t, 5, d.spec, d.params), NotGenerator);
}

TEST_CASE("finite sections converge to the reference") {
  qpt::Desk d;
  const auto q = LatticeIndex::make(1, 0, 0, 0);
  const int big = reference_truncation(1);
  CHECK(finite_vs_periodic(q, 0.4, -big, big, d.spec, d.params) < 1e-10);
  double prev = 1e300;
  for (int j = 1; j <= 4; ++j) {
    const double gap = finite_vs_periodic(q, 0.4, -j, j, d.spec, d.params);
    CHECK(gap <= prev + 1e-12);
    prev = gap;
  }
}

TEST_CASE("band functions and zones") {
  qpt::Desk d;
  const auto q = LatticeIndex::make(1, 0, 0, 0);
  const double p = 2.0 * std::numbers::pi;
  std::vector<double> ts;
  for (int i = 0; i <= 16; ++i) ts.push_back(p * i / 32.0);  // [0, p/2]
  const auto b = band_function(q, 3, ts, 24, d.spec, d.params);
  REQUIRE(b.zone_lengths.size() == 3);
  for (double z : b.zone_lengths) CHECK(z > 0.0);
  // With the weak potential the lowest zone is close to the free zone [0, (p/2)^2].
  CHECK(b.zone_lengths[0] == doctest::Approx(p * p / 4.0).epsilon(0.05));
  for (int i = 1; i < static_cast<int>(ts.size()); ++i) CHECK(b.bands.at({0, ts[i]}) >= b.bands.at({0, ts[i - 1]}));
}

TEST_CASE("chain separation identity") {
  qpt::Desk d;
  const auto q = LatticeIndex::make(0, 0, 0, 1);
  ChainSubset s;
  s.central = LatticeIndex::make(1, -1, 0, 0);
  for (int n = -3; n <= 3; ++n) s.points.push_back(s.central + n * q);
  const Vec2 kappa{7.3, -2.1};
  const auto M = assemble(kappa, s.points, d.spec, d.params);
  CHECK(separation_check(s, q, kappa, d.spec, d.params) <= 1e-12 * M.norm_bound);
}

TEST_CASE("free potential gives the unperturbed eigenvalue") {
  qpt::Desk d;
  const double k = 15.0;
  const auto pr = d.profile(k);
  const LevelInputs in{&d.free, &d.params, &pr, nullptr};
  const Vec2 kappa = k * qpt::along(1.0);
  SeriesOptions o;
  o.full_projector = true;
  const auto r = eigenvalue_level(1, kappa, in, o);
  CHECK(r.lambda == kappa.squaredNorm());
  for (std::size_t i = 1; i < r.g.size(); ++i) CHECK(r.g[i] == 0.0);
  const auto st = level1_state(kappa, d.free, d.params, pr);
  REQUIRE(r.v.size() == static_cast<Eigen::Index>(st.indices.size()));
  for (std::size_t i = 0; i < st.indices.size(); ++i)
    CHECK(std::abs(r.v[static_cast<Eigen::Index>(i)]) == (st.indices[i].is_zero() ? 1.0 : 0.0));
  const auto dp = derivative_probe(1, k, 0.0, 0.5, in);
  CHECK(dp.d_kappa == 2.0 * k);
  CHECK(dp.d_phi == 0.0);
  const auto dq = derivative_probe(1, k, 1.0, 1e-3, in);
  CHECK(dq.d_kappa == doctest::Approx(2.0 * k).epsilon(1e-9));
  CHECK(std::abs(dq.d_phi) < 1e-8);
}

TEST_CASE("level one series against closed forms and the oracle") {
  qpt::Desk d;
  for (double k : {15.0, 25.0}) {
    const auto pr = d.profile(k);
    const LevelInputs in{&d.spec, &d.params, &pr, nullptr};
    const auto om = build_omega1(k, d.params, pr);
    const double phi = 0.5 * (om.omega.intervals()[0].lo + om.omega.intervals()[0].hi);
    const Vec2 kappa = k * qpt::along(phi);
    SeriesOptions o;
    o.check_oracle = true;
    const auto r = eigenvalue_level(1, kappa, in, o);
    REQUIRE(r.converged);
    CHECK(std::abs(r.g[1]) < 1e-14);
    const double g2 = second_order_closed_form(kappa, d.spec, d.params, pr.R_tilde);
    CHECK(r.g[2] == doctest::Approx(g2).epsilon(1e-10));
    REQUIRE(r.oracle_lambda.has_value());
    CHECK(std::abs(r.lambda - *r.oracle_lambda) <= 1e-9 * k * k + 10.0 * r.tail);
    CHECK(r.oracle_count == 1);
    for (double gi : r.g_imag) CHECK(std::abs(gi) < 1e-12);
  }
}

TEST_CASE("derivative of the second order term") {
  qpt::Desk d;
  const double k = 25.0, phi = 0.7;
  const double h = 1e-3;
  auto g2 = [&](double kap) { return second_order_closed_form(kap * qpt::along(phi), d.spec, d.params, 2); };
  const double fd = (g2(k + h) - g2(k - h)) / (2.0 * h);
  CHECK(second_order_closed_form_dkappa(k, phi, d.spec, d.params, 2) == doctest::Approx(fd).epsilon(1e-5));
}
