#include "qp/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "qp/errors.hpp"
#include "qp/fiber.hpp"

namespace qp {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 nu(double phi) { return Vec2(std::cos(phi), std::sin(phi)); }

int set_distance(const std::vector<LatticeIndex>& a, const std::vector<LatticeIndex>& b) {
  int best = std::numeric_limits<int>::max();
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, triple_norm(x - y));
  return best;
}

std::vector<LatticeIndex> neighborhood(const std::vector<LatticeIndex>& pts, int radius) {
  std::set<LatticeIndex> out(pts.begin(), pts.end());
  if (radius > 0)
    for (const auto& m : pts)
      for (const auto& o : box_cached(radius)) out.insert(m + o);
  return {out.begin(), out.end()};
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

}  // namespace

double resonance_value(double phi, double k, const Vec2& p) { return p.squaredNorm() + 2.0 * k * p.dot(nu(phi)); }

bool resonant_at(double phi, double k, const LatticeIndex& m, const QPParams& params, double threshold) {
  return std::abs(resonance_value(phi, k, dual_vector(m, params).p)) <= threshold;
}

bool step1_resonant(double phi, double k, const LatticeIndex& m, const QPParams& params, const Profile& profile) {
  return resonant_at(phi, k, m, params, profile.T1);
}

AngleSet resonance_arcs(double k, const Vec2& p, double threshold) {
  const double pn = p.norm();
  if (pn == 0.0) return threshold >= 0.0 ? AngleSet::full() : AngleSet{};
  const double theta = std::atan2(p.y(), p.x());
  const double clo = (-threshold - pn * pn) / (2.0 * k * pn);
  const double chi = (threshold - pn * pn) / (2.0 * k * pn);
  if (clo > 1.0 || chi < -1.0) return {};
  const double a = std::acos(std::clamp(chi, -1.0, 1.0));  // smaller angle
  const double b = std::acos(std::clamp(clo, -1.0, 1.0));  // larger angle
  return AngleSet::from_arcs({{theta + a, theta + b}, {theta - b, theta - a}});
}

CrossingAngles crossing_angles(double k, const Vec2& p) {
  CrossingAngles c;
  const double pn = p.norm();
  if (pn == 0.0 || pn > 2.0 * k) return c;
  const double theta = std::atan2(p.y(), p.x());
  const double a = std::acos(-pn / (2.0 * k));
  c.real = true;
  c.plus = wrap_angle(theta + a);
  c.minus = wrap_angle(theta - a);
  return c;
}

bool ResonanceDiscs::covers(double phi) const {
  if (kind == Kind::Unbounded) return true;
  for (double c : centers)
    if (angle_distance(phi, c) <= radius) return true;
  return false;
}

ResonanceDiscs resonance_discs(double k, const Vec2& p, double threshold, double tau) {
  ResonanceDiscs d;
  const double pn = p.norm();
  const double theta = std::atan2(p.y(), p.x());
  if (pn > 4.0 * k) return d;
  const double gap = std::abs(4.0 * k * k - pn * pn);
  if (gap > 4.0 * threshold) {
    if (pn > 2.0 * k) return d;
    if (pn * k < threshold) {
      d.kind = ResonanceDiscs::Kind::Unbounded;
      return d;
    }
    const auto c = crossing_angles(k, p);
    d.kind = ResonanceDiscs::Kind::Transversal;
    d.radius = threshold / (k * pn * std::sqrt(1.0 - pn * pn / (4.0 * k * k)));
    d.centers = {c.plus, c.minus};
    return d;
  }
  d.kind = ResonanceDiscs::Kind::Tangential;
  d.radius = 32.0 * std::sqrt(tau * threshold) / k;
  const auto c = crossing_angles(k, p);
  if (c.real)
    d.centers = {c.plus, c.minus};
  else
    d.centers = {wrap_angle(theta + kPi)};
  return d;
}

Omega1 build_omega1(double k, const QPParams& params, const Profile& profile) {
  if (!(k > profile.k_min)) {
    std::ostringstream os;
    os << "k=" << k << " is below the profile k_min=" << profile.k_min;
    throw ConfigError(os.str());
  }
  std::vector<Interval> arcs;
  for (const auto& m : box_cached(profile.R_tilde)) {
    if (m.is_zero()) continue;
    const auto set = resonance_arcs(k, dual_vector(m, params).p, profile.T1);
    arcs.insert(arcs.end(), set.intervals().begin(), set.intervals().end());
  }
  Omega1 o;
  o.k = k;
  o.excluded = AngleSet::from_arcs(arcs);
  o.omega = o.excluded.complement();
  return o;
}

bool in_O1(double phi, double k, const QPParams& params, const Profile& profile) {
  for (const auto& m : box_cached(profile.R_tilde)) {
    if (m.is_zero()) continue;
    if (std::abs(resonance_value(phi, k, dual_vector(m, params).p)) <= profile.T1) return true;
  }
  return false;
}

const char* to_string(Strength s) {
  switch (s) {
    case Strength::Weak: return "weak";
    case Strength::Strong: return "strong";
    default: return "unknown";
  }
}

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Core: return "core";
    case BlockKind::M1Box: return "m1-box";
    case BlockKind::TrivialStrong: return "trivial-strong";
    case BlockKind::NontrivialWeak: return "nontrivial-weak";
    case BlockKind::NontrivialStrong: return "nontrivial-strong";
    case BlockKind::Merged: return "merged";
  }
  return "unknown";
}

ClusterDecomposition classify(double phi0, double k, int radius, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile) {
  if (in_O1(phi0, k, params, profile)) {
    std::ostringstream os;
    os << "phi0=" << phi0 << " lies in the step-one resonant set at k=" << k;
    throw ResonantBase(os.str());
  }
  ClusterDecomposition d;
  d.phi0 = phi0;
  d.k = k;
  d.radius = radius;
  const Vec2 kv = k * nu(phi0);
  auto f = [&](const LatticeIndex& m) {
    const Vec2 p = dual_vector(m, params).p;
    return (kv + p).squaredNorm() - k * k;
  };

  for (const auto& m : box_cached(2 * radius)) {
    if (m.is_zero()) continue;
    if (std::abs(f(m)) <= profile.Tstar) {
      d.Mprime.push_back(m);
      if (triple_norm(m) <= radius) d.M.push_back(m);
    }
  }

  const int R = profile.R;
  std::set<LatticeIndex> m2;
  for (const auto& m : d.M) {
    int best = std::numeric_limits<int>::max();
    for (const auto& o : d.Mprime)
      if (!(o == m)) best = std::min(best, triple_norm(m - o));
    if (best > R)
      d.M1.push_back(m);
    else
      m2.insert(m);
  }

  // Chain equivalence on M': links of length <= 3R.
  const std::size_t n = d.Mprime.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (triple_norm(d.Mprime[i] - d.Mprime[j]) <= 3 * R) uf.unite(static_cast<int>(i), static_cast<int>(j));
  std::map<int, std::vector<LatticeIndex>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[uf.find(static_cast<int>(i))].push_back(d.Mprime[i]);

  const double Tstar = profile.Tstar;
  for (auto& [root, members] : groups) {
    bool touches_m2 = false;
    for (const auto& m : members)
      if (m2.count(m)) touches_m2 = true;
    if (!touches_m2) continue;

    ChainClass cls;
    cls.members = members;
    const LatticeIndex base = members.front();
    const LatticeIndex dir = members[1] - base;
    for (const auto& m : members)
      if (!dual_colinear(m - base, dir, params)) cls.colinear = false;

    if (cls.colinear) {
      for (const auto& [q, v] : spec.coeffs) {
        if (!(LatticeIndex{} < q)) continue;
        if (dual_colinear(q, dir, params)) {
          cls.has_direction = true;
          cls.direction = primitive_direction(q);
          if (!(LatticeIndex{} < cls.direction)) cls.direction = -cls.direction;
          break;
        }
      }
    } else {
      ++d.non_colinear_classes;
    }

    if (cls.has_direction) {
      const Vec2 pq = dual_vector(cls.direction, params).p;
      cls.p_q = pq.norm();
      const Vec2 nq = pq / cls.p_q;
      const Vec2 nperp(-nq.y(), nq.x());
      cls.t_perp = (kv + dual_vector(base, params).p).dot(nperp);
      cls.trivial = std::abs(k * k - cls.t_perp * cls.t_perp) > Tstar / 8.0;
    }

    if (cls.trivial) {
      for (const auto& m : members) {
        ChainSubset s;
        s.central = m;
        s.points = {m};
        s.t_q = cls.has_direction ? (kv + dual_vector(m, params).p).dot(dual_vector(cls.direction, params).p) / cls.p_q
                                  : 0.0;
        cls.subsets.push_back(s);
      }
    } else {
      const Vec2 nq = dual_vector(cls.direction, params).p / cls.p_q;
      std::map<LatticeIndex, std::vector<int>> lines;  // central point -> member offsets
      for (const auto& m : members) {
        const double t = (kv + dual_vector(m, params).p).dot(nq);
        const int n0 = -static_cast<int>(std::floor(t / cls.p_q));
        LatticeIndex c = m + n0 * cls.direction;
        // Guard the floor against rounding at the period boundary.
        double tc = (kv + dual_vector(c, params).p).dot(nq);
        if (tc < 0) {
          c = c + cls.direction;
        } else if (tc >= cls.p_q) {
          c = c - cls.direction;
        }
        lines[c].push_back(-n0);
      }
      for (auto& [c, offs] : lines) {
        ChainSubset s;
        s.central = c;
        s.t_q = (kv + dual_vector(c, params).p).dot(nq);
        const double reach = std::sqrt(std::max(0.0, k * k - cls.t_perp * cls.t_perp + Tstar));
        const int span = static_cast<int>(std::ceil((reach + cls.p_q) / cls.p_q)) + 1;
        int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
        for (int j = -span; j <= span; ++j)
          if (std::abs(f(c + j * cls.direction)) <= Tstar) {
            lo = std::min(lo, j);
            hi = std::max(hi, j);
          }
        for (int o : offs) {
          lo = std::min(lo, o);
          hi = std::max(hi, o);
        }
        s.n_minus = lo;
        s.n_plus = hi;
        for (int j = lo; j <= hi; ++j) s.points.push_back(c + j * cls.direction);
        cls.subsets.push_back(s);
      }
    }
    d.classes.push_back(std::move(cls));
  }
  return d;
}

std::vector<Pole> block_poles(const std::vector<LatticeIndex>& block, double k, Interval window,
                              const PotentialSpec& spec, const QPParams& params, const Profile& profile,
                              const KappaOfPhi& kappa_of_phi) {
  std::vector<Pole> poles;
  const std::size_t n = block.size();
  if (n == 0) return poles;
  std::vector<Vec2> ps(n);
  for (std::size_t i = 0; i < n; ++i) ps[i] = dual_vector(block[i], params).p;
  const FiberMatrix base = assemble(Vec2::Zero(), block, spec, params);
  Eigen::MatrixXcd H = base.H;
  const double k2 = k * k;

  auto eval = [&](double phi) {
    const double kap = kappa_of_phi ? kappa_of_phi(phi) : k;
    const Vec2 K = kap * nu(phi);
    Eigen::VectorXd e(static_cast<Eigen::Index>(n));
    if (n == 1) {
      e(0) = (K + ps[0]).squaredNorm() - k2;
      return e;
    }
    for (std::size_t i = 0; i < n; ++i) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (K + ps[i]).squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return Eigen::VectorXd(es.eigenvalues().array() - k2);
  };

  const int N = std::max(2, profile.pole_scan);
  std::vector<double> grid(N + 1);
  std::vector<Eigen::VectorXd> vals(N + 1);
  for (int j = 0; j <= N; ++j) {
    grid[j] = window.lo + (window.hi - window.lo) * j / N;
    vals[j] = eval(grid[j]);
  }
  std::vector<double> roots;
  for (std::size_t b = 0; b < n; ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    for (int j = 0; j < N; ++j) {
      const double ga = vals[j](bi), gb = vals[j + 1](bi);
      if (ga == 0.0) {
        roots.push_back(grid[j]);
        continue;
      }
      if ((ga < 0) == (gb < 0) || gb == 0.0) continue;
      double a = grid[j], c = grid[j + 1], fa = ga;
      while (c - a > profile.bisect_tol) {
        const double mid = 0.5 * (a + c);
        const double fm = eval(mid)(bi);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          c = mid;
        }
        if (mid == a && mid == c) break;
      }
      roots.push_back(0.5 * (a + c));
    }
    if (vals[N](bi) == 0.0) roots.push_back(grid[N]);
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (!poles.empty() && r - poles.back().phi <= 10.0 * profile.bisect_tol)
      ++poles.back().multiplicity;
    else
      poles.push_back({r, 1});
  }
  return poles;
}

int pole_count(const std::vector<Pole>& poles) {
  int c = 0;
  for (const auto& p : poles) c += p.multiplicity;
  return c;
}

void strength(ClusterDecomposition& decomp, const PotentialSpec& spec, const QPParams& params, const Profile& profile) {
  const Interval win{decomp.phi0 - profile.W, decomp.phi0 + profile.W};
  for (auto& cls : decomp.classes)
    for (auto& s : cls.subsets) {
      const auto poles = block_poles(s.points, decomp.k, win, spec, params, profile);
      s.poles = pole_count(poles);
      s.strength = s.poles > 0 ? Strength::Strong : Strength::Weak;
    }
  decomp.strength_done = true;
}

BlockProjector assemble_projector(const ClusterDecomposition& decomp, const PotentialSpec& spec,
                                  const QPParams& params, const Profile& profile, int box_radius) {
  (void)params;
  BlockProjector P;
  P.box_radius = box_radius;
  const int R = profile.R;
  const double C = std::max(1.0, profile.cq);
  const int body_r = static_cast<int>(std::floor(R / (6.0 * C)));
  const int branch_r = static_cast<int>(std::floor(R / (5.0 * C)));
  const int m1_r = (R % 3 == 0) ? R / 3 - 1 : R / 3;  // strict R/3 neighborhood

  std::vector<Block> raw;
  raw.push_back({BlockKind::Core, box_cached(R), 0});

  std::set<LatticeIndex> claimed;
  for (const auto& cls : decomp.classes) {
    std::vector<int> strong;
    for (std::size_t i = 0; i < cls.subsets.size(); ++i)
      if (cls.subsets[i].strength == Strength::Strong) strong.push_back(static_cast<int>(i));
    // Strong subsets of one class within R of each other form one strong cluster.
    UnionFind uf(strong.size());
    for (std::size_t a = 0; a < strong.size(); ++a)
      for (std::size_t b = a + 1; b < strong.size(); ++b)
        if (set_distance(cls.subsets[strong[a]].points, cls.subsets[strong[b]].points) <= R)
          uf.unite(static_cast<int>(a), static_cast<int>(b));
    std::map<int, std::vector<int>> clusters;
    for (std::size_t a = 0; a < strong.size(); ++a) clusters[uf.find(static_cast<int>(a))].push_back(strong[a]);

    std::set<int> attached;
    for (const auto& [root, ids] : clusters) {
      std::vector<LatticeIndex> core;
      for (int id : ids) core.insert(core.end(), cls.subsets[id].points.begin(), cls.subsets[id].points.end());
      Block b;
      b.kind = cls.trivial ? BlockKind::TrivialStrong : BlockKind::NontrivialStrong;
      b.n_subsets = static_cast<int>(ids.size());
      std::set<LatticeIndex> pts;
      for (const auto& m : neighborhood(core, body_r)) pts.insert(m);
      if (!cls.trivial) {
        for (std::size_t i = 0; i < cls.subsets.size(); ++i) {
          const auto& s = cls.subsets[i];
          if (s.strength != Strength::Weak) continue;
          if (set_distance(s.points, core) <= branch_r) {
            pts.insert(s.points.begin(), s.points.end());
            attached.insert(static_cast<int>(i));
          }
        }
      }
      b.indices.assign(pts.begin(), pts.end());
      claimed.insert(pts.begin(), pts.end());
      raw.push_back(std::move(b));
    }
    if (!cls.trivial) {
      for (std::size_t i = 0; i < cls.subsets.size(); ++i) {
        const auto& s = cls.subsets[i];
        if (s.strength != Strength::Weak || attached.count(static_cast<int>(i))) continue;
        Block b;
        b.kind = BlockKind::NontrivialWeak;
        b.n_subsets = 1;
        b.indices = s.points;
        raw.push_back(std::move(b));
      }
    }
  }
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (raw[i].kind == BlockKind::NontrivialWeak) claimed.insert(raw[i].indices.begin(), raw[i].indices.end());
  for (const auto& m : decomp.M1) {
    if (claimed.count(m)) continue;
    raw.push_back({BlockKind::M1Box, neighborhood({m}, m1_r), 0});
  }

  // Restrict to the working box.
  for (auto& b : raw) {
    std::vector<LatticeIndex> keep;
    for (const auto& m : b.indices)
      if (triple_norm(m) <= box_radius) keep.push_back(m);
    b.indices = std::move(keep);
  }
  raw.erase(std::remove_if(raw.begin() + 1, raw.end(), [](const Block& b) { return b.indices.empty(); }), raw.end());

  std::map<LatticeIndex, int> owner;
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (const auto& m : raw[i].indices) {
      auto [it, fresh] = owner.emplace(m, static_cast<int>(i));
      if (!fresh) {
        std::ostringstream os;
        os << "blocks " << it->second << " and " << i << " share " << to_string(m);
        throw OverlapDetected(os.str());
      }
    }

  UnionFind uf(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (const auto& m : raw[i].indices)
      for (const auto& [q, v] : spec.nonzero()) {
        auto it = owner.find(m + q);
        if (it == owner.end() || it->second == static_cast<int>(i)) continue;
        const int j = it->second;
        if (i == 0 || j == 0) {
          std::ostringstream os;
          os << "block containing " << to_string(i == 0 ? m + q : m) << " is coupled to the core";
          throw OverlapDetected(os.str());
        }
        if (uf.unite(static_cast<int>(i), j)) ++P.merges;
      }
  std::map<int, Block> merged;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int r = uf.find(static_cast<int>(i));
    auto [it, fresh] = merged.emplace(r, raw[i]);
    if (!fresh) {
      it->second.kind = BlockKind::Merged;
      it->second.n_subsets += raw[i].n_subsets;
      it->second.indices.insert(it->second.indices.end(), raw[i].indices.begin(), raw[i].indices.end());
    }
  }
  for (auto& [r, b] : merged) {
    std::sort(b.indices.begin(), b.indices.end());
    P.blocks.push_back(std::move(b));
  }
  return P;
}

OrthogonalityReport check_orthogonality(const BlockProjector& P, const PotentialSpec& spec) {
  OrthogonalityReport rep;
  std::map<LatticeIndex, int> owner;
  for (std::size_t i = 0; i < P.blocks.size(); ++i)
    for (const auto& m : P.blocks[i].indices)
      if (!owner.emplace(m, static_cast<int>(i)).second) ++rep.overlaps;
  for (std::size_t i = 0; i < P.blocks.size(); ++i)
    for (const auto& m : P.blocks[i].indices)
      for (const auto& [q, v] : spec.nonzero()) {
        auto it = owner.find(m + q);
        if (it == owner.end() || it->second == static_cast<int>(i)) continue;
        ++rep.cross_entries;
        if (i == 0 || it->second == 0) ++rep.core_entries;
      }
  return rep;
}

}  // namespace qp
