#include "qp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qp/errors.hpp"

namespace qp {

namespace {

constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;

bool is_perfect_square(std::int64_t n) {
  if (n < 0) return false;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r * r == n;
}

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long double alpha_ld(const QPParams& params) {
  if (params.quadratic) return params.quadratic->value();
  return static_cast<long double>(params.alpha);
}

// |alpha q - h| evaluated as accurately as long double allows.
long double approx_error(const QPParams& params, std::int64_t q, std::int64_t h) {
  if (params.quadratic) {
    const auto& qi = *params.quadratic;
    long double num = static_cast<long double>(q * qi.a - h * qi.c) +
                      static_cast<long double>(q * qi.b) * std::sqrt(static_cast<long double>(qi.d));
    return std::fabs(num / static_cast<long double>(qi.c));
  }
  return std::fabs(alpha_ld(params) * q - h);
}

}  // namespace

LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b) {
  return {{a.s1[0] + b.s1[0], a.s1[1] + b.s1[1]}, {a.s2[0] + b.s2[0], a.s2[1] + b.s2[1]}};
}
LatticeIndex operator-(const LatticeIndex& a, const LatticeIndex& b) {
  return {{a.s1[0] - b.s1[0], a.s1[1] - b.s1[1]}, {a.s2[0] - b.s2[0], a.s2[1] - b.s2[1]}};
}
LatticeIndex operator-(const LatticeIndex& a) { return {{-a.s1[0], -a.s1[1]}, {-a.s2[0], -a.s2[1]}}; }
LatticeIndex operator*(int n, const LatticeIndex& a) {
  return {{n * a.s1[0], n * a.s1[1]}, {n * a.s2[0], n * a.s2[1]}};
}

std::string to_string(const LatticeIndex& m) {
  std::ostringstream os;
  os << "((" << m.s1[0] << "," << m.s1[1] << "),(" << m.s2[0] << "," << m.s2[1] << "))";
  return os.str();
}

std::size_t LatticeIndexHash::operator()(const LatticeIndex& m) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int i = 0; i < 4; ++i) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(m.coord(i)));
    h *= 1099511628211ULL;
  }
  return h;
}

long double QuadraticIrrational::value() const {
  return (static_cast<long double>(a) + static_cast<long double>(b) * std::sqrt(static_cast<long double>(d))) /
         static_cast<long double>(c);
}

QPParams QPParams::from_quadratic(std::int64_t a, std::int64_t b, std::int64_t d, std::int64_t c, double mu) {
  if (c == 0) throw ConfigError("quadratic descriptor has zero denominator");
  if (b == 0 || d < 0 || is_perfect_square(d))
    throw ConfigError("quadratic descriptor (a + b sqrt d)/c is rational");
  if (mu < 2.0) throw ConfigError("irrationality measure bound mu must be >= 2");
  QPParams p;
  p.quadratic = QuadraticIrrational{a, b, d, c};
  p.alpha = static_cast<double>(p.quadratic->value());
  p.mu = mu;
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  return p;
}

QPParams QPParams::from_continued_fraction(const std::vector<std::int64_t>& terms, double mu) {
  // A prefix is always rational; it stands for an irrational only when long enough to
  // pin alpha to double precision.
  if (terms.size() < 5) throw ConfigError("continued-fraction prefix too short (need >= 5 terms)");
  if (terms[0] != 0) throw ConfigError("continued fraction must start with 0 for alpha in (0,1)");
  for (std::size_t i = 1; i < terms.size(); ++i)
    if (terms[i] <= 0) throw ConfigError("continued-fraction partial quotients must be positive");
  if (mu < 2.0) throw ConfigError("irrationality measure bound mu must be >= 2");
  long double x = 0.0L;
  for (std::size_t i = terms.size(); i-- > 1;) x = 1.0L / (static_cast<long double>(terms[i]) + x);
  QPParams p;
  p.alpha = static_cast<double>(x);
  p.cf_prefix = terms;
  p.mu = mu;
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  return p;
}

double DualVector::angle() const {
  double a = std::atan2(p.y(), p.x());
  return a < 0 ? a + 2.0 * std::numbers::pi : a;
}

DualVector dual_vector(const LatticeIndex& m, const QPParams& params) {
  const long double a = alpha_ld(params);
  DualVector d;
  d.p = Vec2(static_cast<double>(kTwoPi * (m.s1[0] + a * m.s2[0])),
             static_cast<double>(kTwoPi * (m.s1[1] + a * m.s2[1])));
  d.norm3 = triple_norm(m);
  return d;
}

int triple_norm(const LatticeIndex& m) {
  return std::max(std::abs(m.s1[0]), std::abs(m.s1[1])) + std::max(std::abs(m.s2[0]), std::abs(m.s2[1]));
}

std::vector<LatticeIndex> enumerate_box(int radius) {
  std::vector<LatticeIndex> out;
  if (radius < 0) return out;
  for (int a = -radius; a <= radius; ++a)
    for (int b = -radius; b <= radius; ++b) {
      int n1 = std::max(std::abs(a), std::abs(b));
      if (n1 > radius) continue;
      int rest = radius - n1;
      for (int c = -rest; c <= rest; ++c)
        for (int d = -rest; d <= rest; ++d) out.push_back(LatticeIndex::make(a, b, c, d));
    }
  return out;
}

const std::vector<LatticeIndex>& box_cached(int radius) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<std::vector<LatticeIndex>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[radius];
  if (!slot) slot = std::make_unique<std::vector<LatticeIndex>>(enumerate_box(radius));
  return *slot;
}

bool dual_colinear(const LatticeIndex& m, const LatticeIndex& n, const QPParams& params) {
  const __int128 c0 = static_cast<__int128>(m.s1[0]) * n.s1[1] - static_cast<__int128>(m.s1[1]) * n.s1[0];
  const __int128 c1 = static_cast<__int128>(m.s1[0]) * n.s2[1] + static_cast<__int128>(m.s2[0]) * n.s1[1] -
                      static_cast<__int128>(m.s1[1]) * n.s2[0] - static_cast<__int128>(m.s2[1]) * n.s1[0];
  const __int128 c2 = static_cast<__int128>(m.s2[0]) * n.s2[1] - static_cast<__int128>(m.s2[1]) * n.s2[0];
  if (params.quadratic) {
    // c^2 alpha^2 = 2ac alpha - (a^2 - b^2 d), so c^2 * cross = A + B alpha with integers A, B.
    const auto& q = *params.quadratic;
    const __int128 cc = static_cast<__int128>(q.c) * q.c;
    const __int128 k0 = static_cast<__int128>(q.a) * q.a - static_cast<__int128>(q.b) * q.b * q.d;
    const __int128 A = c0 * cc - c2 * k0;
    const __int128 B = c1 * cc + 2 * static_cast<__int128>(q.a) * q.c * c2;
    return A == 0 && B == 0;
  }
  const long double a = alpha_ld(params);
  const long double cross = static_cast<long double>(c0) + static_cast<long double>(c1) * a +
                            static_cast<long double>(c2) * a * a;
  const auto pm = dual_vector(m, params).length(), pn = dual_vector(n, params).length();
  return std::fabs(cross) * 4.0L * std::numbers::pi_v<long double> * std::numbers::pi_v<long double> <=
         1e-12L * (pm * pn + 1.0);
}

bool integer_parallel(const LatticeIndex& m, const LatticeIndex& n) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (static_cast<std::int64_t>(m.coord(i)) * n.coord(j) != static_cast<std::int64_t>(m.coord(j)) * n.coord(i))
        return false;
  return true;
}

LatticeIndex primitive_direction(const LatticeIndex& m) {
  int g = 0;
  for (int i = 0; i < 4; ++i) g = std::gcd(g, std::abs(m.coord(i)));
  if (g == 0) return m;
  return {{m.s1[0] / g, m.s1[1] / g}, {m.s2[0] / g, m.s2[1] / g}};
}

std::vector<std::int64_t> continued_fraction_terms(const QPParams& params, int max_terms) {
  std::vector<std::int64_t> out;
  if (!params.quadratic) {
    for (std::size_t i = 0; i < params.cf_prefix.size() && static_cast<int>(i) < max_terms; ++i)
      out.push_back(params.cf_prefix[i]);
    return out;
  }
  // x = (P + sqrt D) / Q with Q | D - P^2
  const auto& qi = *params.quadratic;
  const std::int64_t D = qi.b * qi.b * qi.c * qi.c * qi.d;
  std::int64_t P, Q;
  if (qi.b * qi.c > 0) {
    P = qi.a * qi.c;
    Q = qi.c * qi.c;
  } else {
    P = -qi.a * qi.c;
    Q = -qi.c * qi.c;
  }
  const std::int64_t s = isqrt(D);
  for (int i = 0; i < max_terms; ++i) {
    std::int64_t a = Q > 0 ? floor_div(P + s, Q) : floor_div(P + s + 1, Q);
    out.push_back(a);
    P = a * Q - P;
    Q = (D - P * P) / Q;
  }
  return out;
}

std::vector<Convergent> convergents(const QPParams& params, std::int64_t max_q) {
  std::vector<Convergent> out;
  const auto terms = continued_fraction_terms(params, 90);
  __int128 h2 = 0, h1 = 1, q2 = 1, q1 = 0;
  for (auto a : terms) {
    const __int128 h = a * h1 + h2;
    const __int128 q = a * q1 + q2;
    if (q > max_q || h > std::numeric_limits<std::int64_t>::max()) break;
    out.push_back({static_cast<std::int64_t>(h), static_cast<std::int64_t>(q)});
    h2 = h1;
    h1 = h;
    q2 = q1;
    q1 = q;
  }
  return out;
}

ApproxPair best_rational(const QPParams& params, double k, double r) {
  const double qmax_d = 4.0 * std::pow(k, r);
  const auto qmax = static_cast<std::int64_t>(std::floor(qmax_d));
  const auto conv = convergents(params, qmax);
  const long double bound = 0.25L * std::pow(static_cast<long double>(k), -static_cast<long double>(r));
  // Convergent errors decrease strictly, so the last admissible one is the best.
  if (!conv.empty() && conv.back().q > 0) {
    const auto& c = conv.back();
    const long double err = approx_error(params, c.q, c.h);
    if (err <= bound) {
      ApproxPair ap;
      ap.q = c.q;
      ap.p = -c.h;
      const long double sign = (alpha_ld(params) * c.q - c.h) >= 0 ? 1.0L : -1.0L;
      ap.eps_q = static_cast<double>(sign * err / c.q);
      return ap;
    }
  }
  std::ostringstream os;
  os << "no q <= " << qmax << " with |alpha q + p| <= " << static_cast<double>(bound);
  throw NoApproximant(os.str());
}

ClusterGrid cluster_decompose(const std::vector<LatticeIndex>& box, const ApproxPair& approx,
                              const QPParams& params) {
  ClusterGrid grid;
  grid.step = approx.eps_q * static_cast<double>(approx.q);
  grid.n_points = box.size();
  const long double a = alpha_ld(params);
  const std::int64_t q = approx.q, p = approx.p;

  struct Pt {
    long double x, y;
    const ClusterKey* key;
  };
  for (const auto& m : box) {
    ClusterKey key;
    for (int j = 0; j < 2; ++j) {
      const std::int64_t s2 = m.s2[j];
      const std::int64_t s2pp = ((s2 % q) + q) % q;
      const std::int64_t s2p = (s2 - s2pp) / q;
      key.s[j] = m.s1[j] - p * s2p;
      key.s2pp[j] = s2pp;
    }
    grid.clusters[key].push_back(m);
  }

  std::vector<Pt> pts;
  pts.reserve(box.size());
  double diam = 0.0;
  for (const auto& [key, members] : grid.clusters) {
    long double lo[2] = {1e300L, 1e300L}, hi[2] = {-1e300L, -1e300L};
    for (const auto& m : members) {
      const long double c[2] = {m.s1[0] + a * m.s2[0], m.s1[1] + a * m.s2[1]};
      for (int j = 0; j < 2; ++j) {
        lo[j] = std::min(lo[j], c[j]);
        hi[j] = std::max(hi[j], c[j]);
      }
      pts.push_back({c[0], c[1], &key});
    }
    diam = std::max(diam, static_cast<double>(std::max(hi[0] - lo[0], hi[1] - lo[1])));
  }
  grid.cluster_diameter = diam;

  std::sort(pts.begin(), pts.end(), [](const Pt& u, const Pt& v) { return u.x < v.x; });
  long double best = std::numeric_limits<long double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size() && pts[j].x - pts[i].x < best; ++j) {
      if (pts[i].key == pts[j].key) continue;
      const long double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
  grid.min_separation = std::isfinite(static_cast<double>(best)) ? static_cast<double>(best) : 0.0;
  return grid;
}

ProductClusterStats cluster_stats_product(int bound, const ApproxPair& approx, const QPParams& params) {
  const long double a = alpha_ld(params);
  const std::int64_t q = approx.q, p = approx.p;
  struct Entry {
    std::int64_t s, s2pp;
    long double x;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(2 * bound + 1) * (2 * bound + 1));
  for (std::int64_t s1 = -bound; s1 <= bound; ++s1)
    for (std::int64_t s2 = -bound; s2 <= bound; ++s2) {
      const std::int64_t s2pp = ((s2 % q) + q) % q;
      const std::int64_t s2p = (s2 - s2pp) / q;
      entries.push_back({s1 - p * s2p, s2pp, s1 + a * s2});
    }
  std::sort(entries.begin(), entries.end(), [](const Entry& u, const Entry& v) {
    return std::tie(u.s, u.s2pp) < std::tie(v.s, v.s2pp);
  });
  struct Span {
    long double lo, hi;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    Span sp{entries[i].x, entries[i].x};
    while (j < entries.size() && entries[j].s == entries[i].s && entries[j].s2pp == entries[i].s2pp) {
      sp.lo = std::min(sp.lo, entries[j].x);
      sp.hi = std::max(sp.hi, entries[j].x);
      ++j;
    }
    spans.push_back(sp);
    i = j;
  }
  ProductClusterStats st;
  st.n_clusters_1d = spans.size();
  long double diam = 0.0L;
  for (const auto& sp : spans) diam = std::max(diam, sp.hi - sp.lo);
  std::sort(spans.begin(), spans.end(), [](const Span& u, const Span& v) { return u.lo < v.lo; });
  long double gap = std::numeric_limits<long double>::infinity();
  long double reach = -std::numeric_limits<long double>::infinity();
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i > 0) gap = std::min(gap, spans[i].lo - reach);
    reach = std::max(reach, spans[i].hi);
  }
  st.cluster_diameter = static_cast<double>(diam);
  // In X x X the closest pair of distinct clusters shares one coordinate cluster.
  st.min_separation = spans.size() > 1 ? static_cast<double>(gap) : 0.0;
  return st;
}

std::int64_t count_short_vectors(int radius, double threshold, const QPParams& params) {
  if (threshold <= 0.0 || radius < 0) return 0;
  const long double a = alpha_ld(params);
  const long double t = static_cast<long double>(threshold) / kTwoPi;
  struct Cand {
    int s1, s2;
    long double x;
  };
  std::vector<Cand> cands;
  for (int b = -radius; b <= radius; ++b) {
    const long double c = -a * b;
    const int lo = std::max(-radius, static_cast<int>(std::floor(c - t)));
    const int hi = std::min(radius, static_cast<int>(std::ceil(c + t)));
    for (int s1 = lo; s1 <= hi; ++s1) {
      const long double x = s1 + a * b;
      if (std::fabs(x) < t) cands.push_back({s1, b, x});
    }
  }
  std::int64_t count = 0;
  const long double t2 = t * t;
  for (const auto& u : cands)
    for (const auto& v : cands) {
      const int n = std::max(std::abs(u.s1), std::abs(v.s1)) + std::max(std::abs(u.s2), std::abs(v.s2));
      if (n > radius) continue;
      if (u.x * u.x + v.x * v.x < t2) ++count;
    }
  return count;
}

std::int64_t count_near_curve(const Vec2& kappa0, int radius, double eps, const CurveRadius& radius_of,
                              double r_lo, double r_hi, const QPParams& params) {
  const long double a = alpha_ld(params);
  struct Val {
    long double v;
    int s1, s2;
  };
  auto axis = [&](double shift) {
    std::vector<Val> vals;
    vals.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int s1 = -radius; s1 <= radius; ++s1)
      for (int s2 = -radius; s2 <= radius; ++s2) vals.push_back({shift + kTwoPi * (s1 + a * s2), s1, s2});
    std::sort(vals.begin(), vals.end(), [](const Val& u, const Val& w) { return u.v < w.v; });
    return vals;
  };
  const auto xs = axis(kappa0.x());
  const auto ys = axis(kappa0.y());
  const long double lo = std::max(0.0L, static_cast<long double>(r_lo) - eps);
  const long double hi = static_cast<long double>(r_hi) + eps;
  std::int64_t count = 0;
  auto scan = [&](const Val& X, long double ylo, long double yhi) {
    auto it = std::lower_bound(ys.begin(), ys.end(), ylo, [](const Val& u, long double y) { return u.v < y; });
    for (; it != ys.end() && it->v <= yhi; ++it) {
      const int n = std::max(std::abs(X.s1), std::abs(it->s1)) + std::max(std::abs(X.s2), std::abs(it->s2));
      if (n > radius) continue;
      const long double rr = std::sqrt(X.v * X.v + it->v * it->v);
      if (rr < lo || rr > hi) continue;
      double phi = std::atan2(static_cast<double>(it->v), static_cast<double>(X.v));
      if (phi < 0) phi += 2.0 * std::numbers::pi;
      const auto R = radius_of(phi);
      if (R && std::fabs(static_cast<double>(rr) - *R) < eps) ++count;
    }
  };
  for (const auto& X : xs) {
    const long double x2 = X.v * X.v;
    if (x2 > hi * hi) continue;
    const long double outer = std::sqrt(hi * hi - x2);
    if (x2 >= lo * lo) {
      scan(X, -outer, outer);
    } else {
      const long double inner = std::sqrt(lo * lo - x2);
      scan(X, -outer, -inner);
      scan(X, inner, outer);
    }
  }
  return count;
}

double psnorm_constant(int radius, const QPParams& params) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : box_cached(radius)) {
    if (m.is_zero()) continue;
    const auto d = dual_vector(m, params);
    best = std::min(best, d.length() * std::pow(static_cast<double>(d.norm3), params.mu) /
                              (2.0 * std::numbers::pi));
  }
  return best;
}

}  // namespace qp
