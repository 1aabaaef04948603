#include <cmath>
#include <numbers>
#include <map>
#include <random>

#include "doctest.h"

#include "fixture.hpp"
#include "qp/resonance.hpp"

using namespace qp;

TEST_CASE("angle sets") {
  const double twopi = 2.0 * std::numbers::pi;
  CHECK(AngleSet::full().measure() == doctest::Approx(twopi));
  const auto s = AngleSet::from_arcs({{-0.2, 0.3}, {0.25, 0.5}, {3.0, 3.5}});
  CHECK(s.measure() == doctest::Approx(0.7 + 0.5));
  CHECK(s.contains(twopi - 0.1));
  CHECK(s.contains(0.4));
  CHECK_FALSE(s.contains(1.0));
  CHECK(s.complement().measure() == doctest::Approx(twopi - s.measure()));
  CHECK(s.unite(s.complement()).measure() == doctest::Approx(twopi));
  CHECK(s.intersect(s.complement()).measure() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.subtract(s).empty());
  CHECK(angle_distance(0.1, twopi - 0.1) == doctest::Approx(0.2));
  CHECK(wrap_angle(-0.5) == doctest::Approx(twopi - 0.5));
}

TEST_CASE("step one resonance") {
  qpt::Desk d;
  const double k = 15.0;
  const auto pr = d.profile(k);
  CHECK(pr.T1 == doctest::Approx(0.4 * std::sqrt(k)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  for (const auto& m : enumerate_box(pr.R_tilde)) {
    if (m.is_zero()) continue;
    const auto dv = dual_vector(m, d.params);
    if (dv.length() > 4.0 * k)
      for (int i = 0; i < 8; ++i) CHECK_FALSE(step1_resonant(u(rng), k, m, d.params, pr));
    const auto ca = crossing_angles(k, dv.p);
    if (ca.real) {
      CHECK(std::abs(resonance_value(ca.plus, k, dv.p)) < 1e-9 * k * k);
      CHECK(std::abs(resonance_value(ca.minus, k, dv.p)) < 1e-9 * k * k);
      CHECK(step1_resonant(ca.plus, k, m, d.params, pr));
      CHECK(resonant_at(ca.minus, k, m, d.params, 0.0 + 1e-9 * k * k));
    }
    const double phi = u(rng);
    if (resonant_at(phi, k, m, d.params, 1.0)) CHECK(resonant_at(phi, k, m, d.params, 2.0));
  }
}

TEST_CASE("omega one is independent of the potential and covered by discs") {
  qpt::Desk d;
  const double k = 25.0;
  const auto pr = d.profile(k);
  const auto om = build_omega1(k, d.params, pr);
  CHECK(om.omega.measure() + om.excluded.measure() == doctest::Approx(2.0 * std::numbers::pi));
  // The construction takes no potential; a second build must agree exactly.
  const auto again = build_omega1(k, d.params, pr);
  REQUIRE(again.excluded.intervals().size() == om.excluded.intervals().size());
  for (std::size_t i = 0; i < om.excluded.intervals().size(); ++i) {
    CHECK(again.excluded.intervals()[i].lo == om.excluded.intervals()[i].lo);
    CHECK(again.excluded.intervals()[i].hi == om.excluded.intervals()[i].hi);
  }
  int checked = 0;
  for (const auto& iv : om.excluded.intervals()) {
    const double phi = 0.5 * (iv.lo + iv.hi);
    CHECK(in_O1(phi, k, d.params, pr));
    bool covered = false;
    for (const auto& m : enumerate_box(pr.R_tilde)) {
      if (m.is_zero()) continue;
      const auto dv = dual_vector(m, d.params);
      if (!resonant_at(phi, k, m, d.params, pr.T1)) continue;
      covered = covered || resonance_discs(k, dv.p, pr.T1, pr.tau).covers(phi);
    }
    CHECK(covered);
    if (++checked == 40) break;
  }
  CHECK(build_omega1(60.0, d.params, d.profile(60.0)).excluded.measure() < om.excluded.measure());
}

TEST_CASE("empty decomposition away from resonances") {
  qpt::Desk d;
  const double k = 25.0;
  auto pr = d.profile(k);
  pr.Tstar = 1e-12;  // nothing passes the M test
  const auto om = build_omega1(k, d.params, pr);
  const double phi = 0.5 * (om.omega.intervals()[0].lo + om.omega.intervals()[0].hi);
  auto dec = classify(phi, k, pr.R2, d.spec, d.params, pr);
  CHECK(dec.M.empty());
  CHECK(dec.M1.empty());
  CHECK(dec.classes.empty());
  strength(dec, d.spec, d.params, pr);
  const auto P = assemble_projector(dec, d.spec, d.params, pr, pr.R2);
  REQUIRE(P.blocks.size() == 1);
  CHECK(P.blocks[0].kind == BlockKind::Core);
  const auto orth = check_orthogonality(P, d.spec);
  CHECK(orth.cross_entries == 0);
  CHECK(orth.core_entries == 0);
}

TEST_CASE("decomposition and projector at desk scale") {
  qpt::Desk d;
  std::mt19937_64 rng(11);
  for (double k : {15.0, 25.0}) {
    const auto pr = d.profile(k);
    const auto om = build_omega1(k, d.params, pr);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    int done = 0;
    while (done < 4) {
      const double phi = u(rng);
      if (!om.omega.contains(phi)) continue;
      ++done;
      auto dec = classify(phi, k, pr.R2, d.spec, d.params, pr);
      // Every point of M lands in M1 or in exactly one class; classes may also hold points of M' outside M.
      std::map<LatticeIndex, int> hits;
      for (const auto& m : dec.M1) ++hits[m];
      for (const auto& c : dec.classes)
        for (const auto& m : c.members)
          if (triple_norm(m) <= pr.R2) ++hits[m];
      CHECK(hits.size() == dec.M.size());
      for (const auto& m : dec.M) CHECK(hits[m] == 1);
      for (const auto& c : dec.classes)
        for (const auto& s : c.subsets)
          for (const auto& s2 : c.subsets) {
            CHECK(std::abs(s.n_minus - s2.n_minus) <= 1);
            CHECK(std::abs(s.n_plus - s2.n_plus) <= 1);
          }
      strength(dec, d.spec, d.params, pr);
      const auto P = assemble_projector(dec, d.spec, d.params, pr, pr.R2);
      const auto orth = check_orthogonality(P, d.spec);
      CHECK(orth.cross_entries == 0);
      CHECK(orth.core_entries == 0);
      CHECK(orth.overlaps == 0);
    }
  }
}

TEST_CASE("free one-point block poles are the cosine roots") {
  qpt::Desk d;
  const double k = 15.0;
  const auto pr = d.profile(k);
  // Outside the step-one box, so its crossings are not excluded by its own resonance.
  const auto m = LatticeIndex::make(3, 0, 0, 0);
  REQUIRE(triple_norm(m) > pr.R_tilde);
  const auto dv = dual_vector(m, d.params);
  const auto ca = crossing_angles(k, dv.p);
  REQUIRE(ca.real);
  const double w = 0.05;
  const auto poles = block_poles({m}, k, Interval{ca.plus - w, ca.plus + w}, d.free, d.params, pr);
  REQUIRE(pole_count(poles) == 1);
  CHECK(angle_distance(poles[0].phi, ca.plus) < 1e-9);
  CHECK(appendix4_count(m, k, 0.0, d.free, d.params, pr) == 2);
}
