#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"

#include "fixture.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/multiscale.hpp"
#include "qp/wavefunction.hpp"

using namespace qp;

namespace {

RegionComponent ball(const LatticeIndex& c, int radius, const PotentialSpec& spec) {
  RegionComponent rc;
  rc.color = Color::White;
  for (const auto& m : enumerate_box(radius)) rc.indices.push_back(c + m);
  std::sort(rc.indices.begin(), rc.indices.end());
  const std::set<LatticeIndex> own(rc.indices.begin(), rc.indices.end());
  for (const auto& m : rc.indices)
    for (const auto& [q, v] : spec.nonzero())
      if (!own.count(m + q)) {
        rc.boundary.push_back(m);
        break;
      }
  return rc;
}

}  // namespace

TEST_CASE("empty resonant set gives an empty map") {
  qpt::Desk d;
  const auto pr = d.profile(25.0);
  const M2Set none;
  const auto map = region_map(none, 25.0, d.params, d.spec, pr);
  CHECK(map.components.empty());
  const auto st = region_stats(map, none, {LatticeIndex{}, LatticeIndex::make(1, 0, 0, 0)}, pr);
  CHECK(st.sizes.empty());
  CHECK(st.max_ratio == 0.0);
  const auto b = boundary_check(map, d.spec);
  CHECK(b.max_cross == 0.0);
  CHECK(b.max_boundary == 0.0);
  CHECK(check_separations(map, pr).violations == 0);
}

TEST_CASE("constructed two-component maps") {
  qpt::Desk d;
  RegionMap map;
  map.k = 25.0;
  map.components.push_back(ball(LatticeIndex::make(10, 0, 0, 0), 2, d.spec));
  map.components.push_back(ball(LatticeIndex::make(-10, 0, 0, 0), 2, d.spec));
  const auto b = boundary_check(map, d.spec);
  CHECK(b.max_cross == 0.0);
  CHECK(b.max_boundary == 0.0);
  CHECK(b.checked > 0);

  // Touching components are reported.
  RegionMap touching = map;
  touching.components[1] = ball(LatticeIndex::make(15, 0, 0, 0), 2, d.spec);
  CHECK(boundary_check(touching, d.spec).max_cross == doctest::Approx(0.08));
  // A rim that is not marked is reported.
  RegionMap unmarked = map;
  unmarked.components[0].boundary.clear();
  CHECK(boundary_check(unmarked, d.spec).max_boundary > 0.0);
}

TEST_CASE("region map at one base angle") {
  qpt::Desk d;
  const double k = 15.0;
  const auto pr = d.profile(k);
  const LevelInputs in{&d.spec, &d.params, &pr, nullptr};
  // The construction needs a base angle that is admissible at level two.
  double phi = -1.0, kappa1 = 0.0;
  for (int i = 0; i < 64 && phi < 0.0; ++i) {
    const double t = 2.0 * std::numbers::pi * (i + 0.5) / 64.0;
    if (in_O1(t, k, d.params, pr)) continue;
    kappa1 = solve_radius(1, k * k, t, in).kappa;
    if (level_two_setup(t, k, kappa1, d.spec, d.params, pr).pole_free) phi = t;
  }
  REQUIRE(phi >= 0.0);
  const auto m2 = build_M2set(phi, k, kappa1, d.spec, d.params, pr);
  CHECK(m2.core_violations == 0);
  for (const auto& m : m2.points) CHECK(triple_norm(m) > pr.R2);
  const auto map = region_map(m2, k, d.params, d.spec, pr);
  CHECK(same_map(merge_components(map, d.spec, pr), map));
  CHECK(check_separations(map, pr).violations == 0);
  const auto b = boundary_check(map, d.spec);
  CHECK(b.max_cross == 0.0);
  CHECK(b.max_boundary == 0.0);
  std::set<LatticeIndex> seen;
  for (const auto& c : map.components)
    for (const auto& m : c.indices) CHECK(seen.insert(m).second);
}

TEST_CASE("free wavefunction is the plane wave") {
  qpt::Desk d;
  const double k = 15.0;
  const auto pr = d.profile(k);
  const LevelInputs in{&d.free, &d.params, &pr, nullptr};
  const Vec2 kappa = k * qpt::along(1.0);
  const auto wf = synthesize(1, kappa, in);
  const auto pw = plane_wave(kappa);
  CHECK(coefficient_l1_distance(wf, pw) == 0.0);
  const auto res = residual(wf, d.free, d.params);
  CHECK(res.l1 == 0.0);
  const auto s = sample(wf, pw, d.params, 16);
  CHECK(s.sup_u == 0.0);
  CHECK(s.sup_psi == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("level one wavefunction bounds") {
  qpt::Desk d;
  const double k = 25.0;
  const auto pr = d.profile(k);
  const LevelInputs in{&d.spec, &d.params, &pr, nullptr};
  const auto om = build_omega1(k, d.params, pr);
  const double phi = 0.5 * (om.omega.intervals()[0].lo + om.omega.intervals()[0].hi);
  const Vec2 kappa = solve_radius(1, k * k, phi, in).kappa * qpt::along(phi);
  const auto wf = synthesize(1, kappa, in);
  double l2 = 0.0;
  for (const auto& [m, c] : wf.coeffs) l2 += std::norm(c);
  CHECK(l2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wf.coeffs.at(LatticeIndex{}).real() > 0.0);
  CHECK(wf.coeffs.at(LatticeIndex{}).imag() == 0.0);
  const auto pw = plane_wave(kappa);
  const double dist = coefficient_l1_distance(wf, pw);
  const auto s = sample(wf, pw, d.params, 32);
  CHECK(s.sup_psi <= 1.0 + dist + 1e-12);
  CHECK(s.sup_u <= dist + 1e-12);
  const auto res = residual(wf, d.spec, d.params);
  CHECK(res.outside_max == 0.0);
  CHECK(res.interior_max <= 1e-9 * k * k);
}
