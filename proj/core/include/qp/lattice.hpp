#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qp {

using Vec2 = Eigen::Vector2d;

// A point m = (s1, s2) of Z^4.
struct LatticeIndex {
  std::array<int, 2> s1{0, 0};
  std::array<int, 2> s2{0, 0};

  static LatticeIndex make(int a, int b, int c, int d) { return {{a, b}, {c, d}}; }

  bool is_zero() const { return s1[0] == 0 && s1[1] == 0 && s2[0] == 0 && s2[1] == 0; }
  int coord(int i) const { return i < 2 ? s1[i] : s2[i - 2]; }

  friend auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
};

LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b);
LatticeIndex operator-(const LatticeIndex& a, const LatticeIndex& b);
LatticeIndex operator-(const LatticeIndex& a);
LatticeIndex operator*(int n, const LatticeIndex& a);
std::string to_string(const LatticeIndex& m);

struct LatticeIndexHash {
  std::size_t operator()(const LatticeIndex& m) const noexcept;
};

// alpha = (a + b sqrt(d)) / c
struct QuadraticIrrational {
  std::int64_t a = 0, b = 1, d = 2, c = 1;
  long double value() const;
};

struct QPParams {
  double alpha = 0.0;
  std::optional<QuadraticIrrational> quadratic;
  std::vector<std::int64_t> cf_prefix;
  double mu = 2.0;
  std::optional<double> N0, N1;

  static QPParams from_quadratic(std::int64_t a, std::int64_t b, std::int64_t d, std::int64_t c,
                                 double mu = 2.0);
  static QPParams from_continued_fraction(const std::vector<std::int64_t>& terms, double mu = 2.0);
  static QPParams sqrt2_minus_1() { return from_quadratic(-1, 1, 2, 1); }
  static QPParams golden_conjugate() { return from_quadratic(-1, 1, 5, 2); }

  bool exact() const { return quadratic.has_value(); }
};

struct DualVector {
  Vec2 p{0.0, 0.0};
  int norm3 = 0;

  double length() const { return p.norm(); }
  double angle() const;
};

DualVector dual_vector(const LatticeIndex& m, const QPParams& params);
int triple_norm(const LatticeIndex& m);
std::vector<LatticeIndex> enumerate_box(int radius);
// Cached enumeration for repeated use with the same radius.
const std::vector<LatticeIndex>& box_cached(int radius);

// True when p_m and p_n are parallel (or one vanishes). Exact for quadratic alpha.
bool dual_colinear(const LatticeIndex& m, const LatticeIndex& n, const QPParams& params);
// True when m and n are parallel as integer vectors of Z^4.
bool integer_parallel(const LatticeIndex& m, const LatticeIndex& n);
LatticeIndex primitive_direction(const LatticeIndex& m);

struct Convergent {
  std::int64_t h = 0;  // numerator
  std::int64_t q = 1;  // denominator
};

std::vector<std::int64_t> continued_fraction_terms(const QPParams& params, int max_terms);
std::vector<Convergent> convergents(const QPParams& params, std::int64_t max_q);

struct ApproxPair {
  std::int64_t q = 1;
  std::int64_t p = 0;
  double eps_q = 0.0;  // alpha + p / q
};

ApproxPair best_rational(const QPParams& params, double k, double r);

// Cluster keys use the unscaled coordinates s1 + alpha s2 (that is p_m / 2 pi).
struct ClusterKey {
  std::array<std::int64_t, 2> s{};
  std::array<std::int64_t, 2> s2pp{};
  friend auto operator<=>(const ClusterKey&, const ClusterKey&) = default;
};

struct ClusterGrid {
  std::map<ClusterKey, std::vector<LatticeIndex>> clusters;
  double step = 0.0;
  double cluster_diameter = 0.0;  // max coordinate extent
  double min_separation = 0.0;    // Euclidean
  std::size_t n_points = 0;
};

ClusterGrid cluster_decompose(const std::vector<LatticeIndex>& box, const ApproxPair& approx,
                              const QPParams& params);

// Cluster statistics over the product box |s_j| <= bound (componentwise), computed
// coordinate by coordinate: the point set is X x X with X = {a + alpha b}.
struct ProductClusterStats {
  std::size_t n_clusters_1d = 0;
  double cluster_diameter = 0.0;
  double min_separation = 0.0;
};
ProductClusterStats cluster_stats_product(int bound, const ApproxPair& approx, const QPParams& params);

// Number of m with triple_norm(m) <= radius and |p_m| < threshold.
std::int64_t count_short_vectors(int radius, double threshold, const QPParams& params);

// Number of points kappa0 + p_n with triple_norm(n) <= radius whose distance to the curve
// {radius_of(phi) nu(phi)} is below eps. radius_of returns nullopt on holes; the curve must lie
// in the annulus r_lo <= |x| <= r_hi.
using CurveRadius = std::function<std::optional<double>(double phi)>;
std::int64_t count_near_curve(const Vec2& kappa0, int radius, double eps, const CurveRadius& radius_of,
                              double r_lo, double r_hi, const QPParams& params);

// min over 0 < triple_norm(m) <= radius of |p_m| * norm3^mu / 2 pi
double psnorm_constant(int radius, const QPParams& params);

}  // namespace qp
