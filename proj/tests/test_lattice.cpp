#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"

#include "qp/errors.hpp"
#include "qp/lattice.hpp"

using namespace qp;

TEST_CASE("dual vectors") {
  const auto a = QPParams::sqrt2_minus_1();
  const double twopi = 2.0 * std::numbers::pi;
  CHECK(dual_vector(LatticeIndex{}, a).p.norm() == 0.0);
  CHECK(dual_vector(LatticeIndex{}, a).norm3 == 0);
  const auto e = dual_vector(LatticeIndex::make(1, 0, 0, 0), a);
  CHECK(e.p.x() == doctest::Approx(twopi));
  CHECK(e.p.y() == 0.0);
  CHECK(e.norm3 == 1);
  const auto m = dual_vector(LatticeIndex::make(-1, 0, 1, 0), a);
  CHECK(m.p.x() == doctest::Approx(twopi * (std::sqrt(2.0) - 2.0)).epsilon(1e-14));
  CHECK(m.p.x() == doctest::Approx(-3.6806).epsilon(1e-4));
}

TEST_CASE("triple norm and boxes") {
  CHECK(triple_norm(LatticeIndex{}) == 0);
  CHECK(triple_norm(LatticeIndex::make(1, 0, 0, 0)) == 1);
  CHECK(triple_norm(LatticeIndex::make(2, -1, 0, 3)) == 5);
  CHECK(enumerate_box(0).size() == 1);
  CHECK(enumerate_box(1).size() == 17);
  for (int r = 0; r <= 3; ++r) {
    const auto box = enumerate_box(r);
    CHECK(box.size() <= static_cast<std::size_t>(std::pow(2 * r + 1, 4)));
    std::set<LatticeIndex> uniq(box.begin(), box.end());
    CHECK(uniq.size() == box.size());
    for (const auto& m : box) CHECK(triple_norm(m) <= r);
    CHECK(box_cached(r) == box);
  }
}

TEST_CASE("best rational approximations") {
  const auto g = QPParams::golden_conjugate();
  // Convergent denominators of the golden conjugate are Fibonacci numbers.
  const std::set<std::int64_t> fib{1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377};
  for (double k : {15.0, 25.0, 40.0, 60.0})
    for (double r : {0.6, 0.8, 1.0}) {
      const auto ap = best_rational(g, k, r);
      CHECK(fib.count(ap.q) == 1);
      CHECK(fib.count(std::llabs(ap.p)) == 1);
      const double kr = std::pow(k, r);
      CHECK(ap.q <= 4.0 * kr);
      CHECK(std::abs(ap.eps_q) <= 0.25 / (ap.q * kr) * (1 + 1e-12));
      CHECK(std::abs(ap.eps_q) >= std::pow(k, -2.0 * r * g.mu));
      CHECK(ap.eps_q == doctest::Approx(g.alpha + static_cast<double>(ap.p) / ap.q).epsilon(1e-9));
    }
}

TEST_CASE("cluster decomposition partitions the box") {
  const auto a = QPParams::sqrt2_minus_1();
  const auto box = enumerate_box(3);
  const auto ap = best_rational(a, 20.0, 0.6);
  const auto grid = cluster_decompose(box, ap, a);
  std::size_t total = 0;
  std::set<LatticeIndex> seen;
  for (const auto& [key, pts] : grid.clusters) {
    total += pts.size();
    seen.insert(pts.begin(), pts.end());
  }
  CHECK(total == box.size());
  CHECK(seen.size() == box.size());

  ApproxPair one;
  one.q = 1;
  one.p = 0;
  one.eps_q = a.alpha;
  for (const auto& [key, pts] : cluster_decompose(box, one, a).clusters) CHECK(key.s2pp == std::array<std::int64_t, 2>{0, 0});
}

TEST_CASE("cluster separation when the approximation is sharp") {
  // A large partial quotient makes |eps_q| small enough for the separation statement.
  const auto a = QPParams::from_continued_fraction({0, 1, 2, 3000, 1, 1, 1, 1, 1, 1});
  const double k = 25.0, r = 0.8;
  const auto ap = best_rational(a, k, r);
  const double q = static_cast<double>(ap.q);
  REQUIRE(std::abs(ap.eps_q) <= 1.0 / (64.0 * q * std::pow(k, r)));
  const auto st = cluster_stats_product(static_cast<int>(std::floor(4.0 * std::pow(k, r))), ap, a);
  CHECK(st.cluster_diameter < 1.0 / (8.0 * q));
  CHECK(st.min_separation > 1.0 / (2.0 * q));
}

TEST_CASE("short vector counts") {
  const auto a = QPParams::sqrt2_minus_1();
  CHECK(count_short_vectors(4, 1e-6, a) == 1);  // only the origin
  // Brute force on a small box.
  const double thr = 1.5;
  std::int64_t brute = 0;
  for (const auto& m : enumerate_box(3))
    if (dual_vector(m, a).length() < thr) ++brute;
  CHECK(count_short_vectors(3, thr, a) == brute);
  for (double k : {15.0, 60.0}) {
    const double r = 1.0;
    const auto ap = best_rational(a, k, r);
    const int radius = static_cast<int>(std::ceil(2.0 * std::pow(k, r))) - 1;
    const auto n = count_short_vectors(radius, std::abs(ap.eps_q) * ap.q * std::pow(k, r / 3.0), a);
    CHECK(static_cast<double>(n) <= std::pow(k, 2.0 * r / 3.0));
    if (ap.q > std::pow(k, 2.0 * r / 3.0))
      CHECK(static_cast<double>(count_short_vectors(radius, std::pow(k, -2.0 * r / 3.0), a)) <=
            4096.0 * std::pow(k, 2.0 * r / 3.0));
  }
}

TEST_CASE("rotation number validation") {
  CHECK_THROWS_AS(QPParams::from_quadratic(1, 0, 2, 2), ConfigError);  // b = 0 is rational
  CHECK_THROWS_AS(QPParams::from_quadratic(0, 1, 4, 3), ConfigError);  // perfect square
  CHECK_THROWS_AS(QPParams::from_continued_fraction({0, 2}), ConfigError);
  CHECK_NOTHROW(QPParams::from_continued_fraction({0, 2, 2, 2, 2, 2}));
}

TEST_CASE("colinearity is exact for quadratic alpha") {
  const auto a = QPParams::sqrt2_minus_1();
  CHECK(dual_colinear(LatticeIndex::make(1, 0, 0, 0), LatticeIndex::make(0, 0, 1, 0), a));
  CHECK(dual_colinear(LatticeIndex::make(1, 0, 0, 0), LatticeIndex::make(-3, 0, 0, 0), a));
  CHECK_FALSE(dual_colinear(LatticeIndex::make(1, 0, 0, 0), LatticeIndex::make(0, 1, 0, 0), a));
  CHECK(integer_parallel(LatticeIndex::make(1, 2, 0, -1), LatticeIndex::make(-2, -4, 0, 2)));
  CHECK(primitive_direction(LatticeIndex::make(2, 4, 0, -2)) == LatticeIndex::make(1, 2, 0, -1));
}
