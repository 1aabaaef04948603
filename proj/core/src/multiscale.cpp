#include "qp/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>

#include "json.hpp"

#include "qp/errors.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/perturb.hpp"

namespace qp {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 nu(double phi) { return Vec2(std::cos(phi), std::sin(phi)); }

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

std::vector<LatticeIndex> neighborhood(const std::vector<LatticeIndex>& pts, int radius) {
  std::set<LatticeIndex> out(pts.begin(), pts.end());
  if (radius > 0)
    for (const auto& m : pts)
      for (const auto& o : box_cached(radius)) out.insert(m + o);
  return {out.begin(), out.end()};
}

bool numerical_failure(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NonConvergent:
    case ErrorKind::ContourHit:
    case ErrorKind::NoRoot:
    case ErrorKind::NotUnique:
    case ErrorKind::OverlapDetected:
      return true;
    default:
      return false;
  }
}

int m1_box_radius(const Profile& profile) { return (profile.R % 3 == 0) ? profile.R / 3 - 1 : profile.R / 3; }

int m1_cap(const LatticeIndex& m, double k, const QPParams& params) {
  return std::abs(2.0 * k - dual_vector(m, params).length()) < 1.0 ? 2 : 1;
}

LatticeIndex cube_of(const LatticeIndex& m, int side) {
  auto f = [side](int x) { return x >= 0 ? x / side : -((-x + side - 1) / side); };
  return LatticeIndex::make(f(m.s1[0]), f(m.s1[1]), f(m.s2[0]), f(m.s2[1]));
}

struct Working {
  std::vector<Color> color;
  std::vector<std::vector<LatticeIndex>> pts;
};

std::map<LatticeIndex, int> owners(const Working& w) {
  std::map<LatticeIndex, int> own;
  for (std::size_t i = 0; i < w.pts.size(); ++i)
    for (const auto& m : w.pts[i]) own.emplace(m, static_cast<int>(i));
  return own;
}

// One round of the merge rules; returns the number of unions performed.
int merge_pass(Working& w, const PotentialSpec& spec, const Profile& profile,
               const std::vector<std::vector<LatticeIndex>>* blocks, int& cross_color) {
  const auto own = owners(w);
  const std::size_t n = w.pts.size();
  UnionFind uf(n);
  int unions = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int sep = separation_threshold(w.color[i], profile);
    for (const auto& m : w.pts[i]) {
      if (sep > 1)
        for (const auto& o : box_cached(sep - 1)) {
          auto it = own.find(m + o);
          if (it == own.end() || it->second == static_cast<int>(i) || w.color[it->second] != w.color[i]) continue;
          if (uf.unite(static_cast<int>(i), it->second)) ++unions;
        }
      for (const auto& [q, v] : spec.nonzero()) {
        auto it = own.find(m + q);
        if (it == own.end() || it->second == static_cast<int>(i)) continue;
        if (uf.unite(static_cast<int>(i), it->second)) {
          ++unions;
          if (w.color[it->second] != w.color[i]) ++cross_color;
        }
      }
    }
  }
  if (blocks)
    for (const auto& b : *blocks) {
      int first = -1;
      for (const auto& m : b) {
        auto it = own.find(m);
        if (it == own.end()) continue;
        if (first < 0)
          first = it->second;
        else if (uf.unite(first, it->second))
          ++unions;
      }
    }
  if (unions == 0) return 0;
  std::map<int, std::size_t> slot;
  Working out;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = uf.find(static_cast<int>(i));
    auto [it, fresh] = slot.emplace(r, out.pts.size());
    if (fresh) {
      out.color.push_back(w.color[i]);
      out.pts.push_back(w.pts[i]);
    } else {
      out.color[it->second] = std::max(out.color[it->second], w.color[i]);
      auto& dst = out.pts[it->second];
      dst.insert(dst.end(), w.pts[i].begin(), w.pts[i].end());
    }
  }
  w = std::move(out);
  return unions;
}

void canonical(Working& w) {
  for (auto& p : w.pts) std::sort(p.begin(), p.end());
  std::vector<std::size_t> order(w.pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w.pts[a].front() < w.pts[b].front(); });
  Working out;
  for (auto i : order) {
    out.color.push_back(w.color[i]);
    out.pts.push_back(std::move(w.pts[i]));
  }
  w = std::move(out);
}

RegionMap finish(Working& w, const std::set<LatticeIndex>& resonant, const PotentialSpec& spec, double k, int core,
                 int merges, int passes) {
  canonical(w);
  RegionMap map;
  map.k = k;
  map.core_radius = core;
  map.merges = merges;
  map.passes = passes;
  const auto own = owners(w);
  for (std::size_t i = 0; i < w.pts.size(); ++i) {
    RegionComponent c;
    c.color = w.color[i];
    c.indices = w.pts[i];
    for (const auto& m : c.indices) {
      if (resonant.count(m)) ++c.n_resonant_points;
      for (const auto& [q, v] : spec.nonzero())
        if (!own.count(m + q)) {
          c.boundary.push_back(m);
          break;
        }
    }
    map.components.push_back(std::move(c));
  }
  return map;
}

int run_merges(Working& w, const PotentialSpec& spec, const Profile& profile,
               const std::vector<std::vector<LatticeIndex>>* blocks, int& cross, int& passes) {
  int total = 0;
  for (;;) {
    ++passes;
    const int u = merge_pass(w, spec, profile, blocks, cross);
    total += u;
    if (u == 0) break;
  }
  return total;
}

}  // namespace

KappaOfPhi kappa1_interpolant(double k, double lo, double hi, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile) {
  LevelInputs in{&spec, &params, &profile, nullptr};
  const double mid = 0.5 * (lo + hi);
  const double a = solve_radius(1, k * k, lo, in).kappa;
  const double b = solve_radius(1, k * k, mid, in).kappa;
  const double c = solve_radius(1, k * k, hi, in).kappa;
  const double h = 0.5 * (hi - lo);
  // Quadratic through (lo, a), (mid, b), (hi, c) in the variable t = (phi - mid) / h.
  return [=](double phi) {
    const double t = (phi - mid) / h;
    return b + 0.5 * (c - a) * t + 0.5 * (a - 2.0 * b + c) * t * t;
  };
}

WindowPoles window_poles(double phi0, double k, const KappaOfPhi& kappa1_of_phi, const PotentialSpec& spec,
                         const QPParams& params, const Profile& profile) {
  WindowPoles out;
  out.phi0 = phi0;
  out.kappa1 = kappa1_of_phi(phi0);
  auto d = classify(phi0, k, profile.R2, spec, params, profile);
  strength(d, spec, params, profile);

  const double w = profile.interval_width;
  const Interval near{phi0 - 2.0 * w, phi0 + 2.0 * w};
  for (const auto& m : d.M1) {
    BlockPoleCount c;
    c.kind = BlockKind::M1Box;
    const auto box = neighborhood({m}, m1_box_radius(profile));
    c.size = box.size();
    const auto poles = block_poles(box, k, near, spec, params, profile, kappa1_of_phi);
    c.poles = pole_count(poles);
    for (const auto& p : poles) c.pole_phi.push_back(p.phi);
    c.cap = m1_cap(m, k, params);
    if (c.poles > c.cap) ++out.violations;
    out.m1_boxes.push_back(std::move(c));
  }
  for (const auto& cls : d.classes)
    for (const auto& s : cls.subsets) {
      BlockPoleCount c;
      c.kind = cls.trivial ? BlockKind::TrivialStrong : BlockKind::NontrivialStrong;
      if (s.strength == Strength::Weak) c.kind = BlockKind::NontrivialWeak;
      c.size = s.points.size();
      c.poles = s.poles;
      c.cap = 2;
      if (c.poles > c.cap) ++out.violations;
      out.subsets.push_back(std::move(c));
    }

  const auto P = assemble_projector(d, spec, params, profile, profile.R2);
  const Interval interval{phi0 - 0.5 * w, phi0 + 0.5 * w};
  for (std::size_t b = 1; b < P.blocks.size(); ++b) {
    const auto& blk = P.blocks[b];
    if (blk.n_subsets > 0 && blk.kind != BlockKind::NontrivialWeak) {
      BlockPoleCount c;
      c.kind = blk.kind;
      c.size = blk.indices.size();
      c.poles = blk.n_subsets;
      c.cap = 2;
      if (c.poles > c.cap) ++out.violations;
      out.strong_clusters.push_back(std::move(c));
    }
    BlockPoleCount c;
    c.kind = blk.kind;
    c.size = blk.indices.size();
    const auto poles = block_poles(blk.indices, k, interval, spec, params, profile, kappa1_of_phi);
    c.poles = pole_count(poles);
    for (const auto& p : poles) c.pole_phi.push_back(p.phi);
    out.blocks.push_back(std::move(c));
  }
  return out;
}

SecondResonantSet second_resonant_set(double k, const std::vector<double>& phi0_grid, const PotentialSpec& spec,
                                      const QPParams& params, const Profile& profile) {
  SecondResonantSet out;
  const double w = profile.interval_width;
  std::vector<Interval> covered, discs;
  for (double phi0 : phi0_grid) {
    if (in_O1(phi0, k, params, profile)) {
      ++out.skipped;
      continue;
    }
    KappaOfPhi kap;
    WindowPoles wp;
    try {
      kap = kappa1_interpolant(k, phi0 - 2.0 * w, phi0 + 2.0 * w, spec, params, profile);
      wp = window_poles(phi0, k, kap, spec, params, profile);
    } catch (const Error& e) {
      if (!numerical_failure(e) && e.kind() != ErrorKind::ResonantBase) throw;
      ++out.skipped;
      continue;
    }
    covered.push_back({phi0 - 0.5 * w, phi0 + 0.5 * w});
    for (const auto& b : wp.blocks)
      for (double p : b.pole_phi) discs.push_back({p - profile.o2_disc, p + profile.o2_disc});
    out.windows.push_back(std::move(wp));
  }
  out.covered = AngleSet::from_arcs(covered);
  out.O2 = AngleSet::from_arcs(discs);
  out.omega2 = out.covered.intersect(build_omega1(k, params, profile).omega).subtract(out.O2);
  return out;
}

M2Set build_M2set(double phi0, double k, double kappa1, const PotentialSpec& spec, const QPParams& params,
                  const Profile& profile) {
  M2Set out;
  auto d = classify(phi0, k, profile.R3, spec, params, profile);
  strength(d, spec, params, profile);
  const Interval disc{phi0 - profile.m2_disc, phi0 + profile.m2_disc};
  const KappaOfPhi fixed = [kappa1](double) { return kappa1; };
  const std::set<LatticeIndex> M(d.M.begin(), d.M.end());

  std::vector<std::vector<LatticeIndex>> candidates;
  for (const auto& m : d.M1) candidates.push_back(neighborhood({m}, m1_box_radius(profile)));
  for (const auto& cls : d.classes)
    for (const auto& s : cls.subsets) {
      if (!cls.trivial && s.strength == Strength::Weak) continue;
      candidates.push_back(s.points);
    }

  std::set<LatticeIndex> points;
  for (const auto& blk : candidates) {
    if (block_poles(blk, k, disc, spec, params, profile, fixed).empty()) continue;
    std::vector<LatticeIndex> res;
    for (const auto& m : blk)
      if (M.count(m)) res.push_back(m);
    if (res.empty()) continue;
    points.insert(res.begin(), res.end());
    out.blocks.push_back(std::move(res));
  }
  out.points.assign(points.begin(), points.end());
  for (const auto& m : out.points)
    if (triple_norm(m) <= profile.R2) ++out.core_violations;
  for (const auto& m : d.M)
    if (!points.count(m) && triple_norm(m) > profile.R2) out.nonresonant.push_back(m);
  return out;
}

const char* to_string(Color c) {
  switch (c) {
    case Color::NonResonant: return "nonresonant";
    case Color::White: return "white";
    case Color::Grey: return "grey";
    case Color::Black: return "black";
    case Color::Simple: return "simple";
  }
  return "unknown";
}

int separation_threshold(Color c, const Profile& profile) {
  switch (c) {
    case Color::Black: return profile.black_radius;
    case Color::Grey: return profile.grey_radius;
    case Color::White: return profile.white_radius;
    case Color::Simple: return profile.simple_radius;
    case Color::NonResonant: return 1;
  }
  return 1;
}

RegionMap region_map(const M2Set& m2, double k, const QPParams& params, const PotentialSpec& spec,
                     const Profile& profile) {
  const std::set<LatticeIndex> resonant(m2.points.begin(), m2.points.end());
  // Without resonant points the whole box is the non-resonant remainder.
  if (resonant.empty()) {
    RegionMap empty;
    empty.k = k;
    empty.core_radius = profile.R2;
    return empty;
  }
  std::vector<std::pair<Color, std::vector<LatticeIndex>>> seeds;

  std::vector<LatticeIndex> rest;
  for (const auto& m : m2.points) {
    if (dual_vector(m, params).length() <= profile.simple_threshold)
      seeds.push_back({Color::Simple, neighborhood({m}, profile.simple_radius)});
    else
      rest.push_back(m);
  }

  // Black: cubes whose count over the cube and its 80 neighbors exceeds the black count.
  std::map<LatticeIndex, int> big;
  for (const auto& m : rest) ++big[cube_of(m, profile.black_box)];
  std::set<LatticeIndex> black_cubes;
  for (const auto& [c, n] : big) {
    int total = 0;
    for (const auto& o : box_cached(2)) {
      if (std::max(std::abs(o.s1[0]), std::abs(o.s1[1])) > 1 || std::max(std::abs(o.s2[0]), std::abs(o.s2[1])) > 1)
        continue;
      auto it = big.find(c + o);
      if (it != big.end()) total += it->second;
    }
    if (total > profile.black_count) black_cubes.insert(c);
  }
  std::vector<LatticeIndex> lighter;
  for (const auto& m : rest) {
    if (black_cubes.count(cube_of(m, profile.black_box)))
      seeds.push_back({Color::Black, neighborhood({m}, profile.black_radius)});
    else
      lighter.push_back(m);
  }

  // Grey: small cubes outside black cubes holding more than the grey count.
  std::map<LatticeIndex, int> small;
  for (const auto& m : lighter) ++small[cube_of(m, profile.grey_box)];
  for (const auto& m : lighter) {
    if (small[cube_of(m, profile.grey_box)] > profile.grey_count)
      seeds.push_back({Color::Grey, neighborhood({m}, profile.grey_radius)});
    else
      seeds.push_back({Color::White, neighborhood({m}, profile.white_radius)});
  }
  for (const auto& m : m2.nonresonant)
    if (!resonant.count(m)) seeds.push_back({Color::NonResonant, {m}});

  // Each point goes to the darkest seed claiming it; ties go to the earliest seed.
  std::map<LatticeIndex, std::pair<Color, int>> claim;
  for (std::size_t s = 0; s < seeds.size(); ++s)
    for (const auto& m : seeds[s].second) {
      auto [it, fresh] = claim.emplace(m, std::make_pair(seeds[s].first, static_cast<int>(s)));
      if (!fresh && it->second.first < seeds[s].first) it->second = {seeds[s].first, static_cast<int>(s)};
    }
  Working w;
  std::map<int, std::size_t> slot;
  for (const auto& [m, cs] : claim) {
    auto [it, fresh] = slot.emplace(cs.second, w.pts.size());
    if (fresh) {
      w.color.push_back(cs.first);
      w.pts.push_back({});
    }
    w.pts[it->second].push_back(m);
  }
  int cross = 0, passes = 0;
  run_merges(w, spec, profile, &m2.blocks, cross, passes);
  return finish(w, resonant, spec, k, profile.R2, cross, passes);
}

RegionMap merge_components(const RegionMap& map, const PotentialSpec& spec, const Profile& profile) {
  Working w;
  std::set<LatticeIndex> resonant;
  for (const auto& c : map.components) {
    w.color.push_back(c.color);
    w.pts.push_back(c.indices);
  }
  int cross = map.merges, passes = 0;
  run_merges(w, spec, profile, nullptr, cross, passes);
  // Resonant counts are carried over from the source components.
  auto out = finish(w, resonant, spec, map.k, map.core_radius, cross, map.passes);
  std::map<LatticeIndex, int> counts;
  for (const auto& c : map.components)
    if (!c.indices.empty()) counts[c.indices.front()] = c.n_resonant_points;
  for (auto& c : out.components) {
    int n = 0;
    for (const auto& m : c.indices) {
      auto it = counts.find(m);
      if (it != counts.end()) n += it->second;
    }
    c.n_resonant_points = n;
  }
  return out;
}

bool same_map(const RegionMap& a, const RegionMap& b) {
  if (a.components.size() != b.components.size()) return false;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    const auto& x = a.components[i];
    const auto& y = b.components[i];
    if (x.color != y.color || x.indices != y.indices || x.boundary != y.boundary ||
        x.n_resonant_points != y.n_resonant_points)
      return false;
  }
  return true;
}

SeparationReport check_separations(const RegionMap& map, const Profile& profile) {
  SeparationReport rep;
  const auto& cs = map.components;
  struct Box {
    std::array<int, 4> lo, hi;
  };
  std::vector<Box> boxes;
  for (const auto& c : cs) {
    Box b;
    b.lo.fill(std::numeric_limits<int>::max());
    b.hi.fill(std::numeric_limits<int>::min());
    for (const auto& m : c.indices)
      for (int i = 0; i < 4; ++i) {
        b.lo[i] = std::min(b.lo[i], m.coord(i));
        b.hi[i] = std::max(b.hi[i], m.coord(i));
      }
    boxes.push_back(b);
  }
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      if (cs[i].color != cs[j].color) continue;
      ++rep.pairs_checked;
      const int sep = separation_threshold(cs[i].color, profile);
      // Coordinate gaps of the bounding boxes bound the triple norm from below.
      std::array<int, 4> gap{};
      for (int a = 0; a < 4; ++a)
        gap[a] = std::max({0, boxes[j].lo[a] - boxes[i].hi[a], boxes[i].lo[a] - boxes[j].hi[a]});
      const int lower = std::max(gap[0], gap[1]) + std::max(gap[2], gap[3]);
      int dist = lower;
      if (lower < sep) {
        dist = std::numeric_limits<int>::max();
        for (const auto& x : cs[i].indices)
          for (const auto& y : cs[j].indices) dist = std::min(dist, triple_norm(x - y));
      }
      // Far pairs contribute their box lower bound to the margin.
      if (dist < sep) ++rep.violations;
      rep.min_margin = rep.pairs_checked == 1 ? dist - sep : std::min(rep.min_margin, dist - sep);
    }
  return rep;
}

BoundaryReport boundary_check(const RegionMap& map, const PotentialSpec& spec) {
  BoundaryReport rep;
  std::map<LatticeIndex, int> own;
  for (std::size_t i = 0; i < map.components.size(); ++i)
    for (const auto& m : map.components[i].indices) own.emplace(m, static_cast<int>(i));
  for (std::size_t i = 0; i < map.components.size(); ++i) {
    const auto& c = map.components[i];
    const std::set<LatticeIndex> rim(c.boundary.begin(), c.boundary.end());
    for (const auto& m : c.indices)
      for (const auto& [q, v] : spec.nonzero()) {
        ++rep.checked;
        auto it = own.find(m + q);
        if (it == own.end()) {
          if (!rim.count(m)) rep.max_boundary = std::max(rep.max_boundary, std::abs(v));
        } else if (it->second != static_cast<int>(i)) {
          rep.max_cross = std::max(rep.max_cross, std::abs(v));
        }
      }
    // Every rim point must really touch the complement.
    for (const auto& m : c.boundary) {
      bool touches = false;
      double vmax = 0.0;
      for (const auto& [q, v] : spec.nonzero()) {
        if (!own.count(m + q)) touches = true;
        vmax = std::max(vmax, std::abs(v));
      }
      if (!touches) rep.max_boundary = std::max(rep.max_boundary, vmax);
    }
  }
  return rep;
}

RegionStats region_stats(const RegionMap& map, const M2Set& m2, const std::vector<LatticeIndex>& centers,
                         const Profile& profile) {
  RegionStats st;
  for (const auto& c : map.components) {
    st.sizes.push_back(static_cast<int>(c.indices.size()));
    st.points.push_back(c.n_resonant_points);
    switch (c.color) {
      case Color::Black: ++st.black; break;
      case Color::Grey: ++st.grey; break;
      case Color::White: ++st.white; break;
      case Color::Simple: ++st.simple; break;
      case Color::NonResonant: ++st.nonresonant; break;
    }
  }
  const double scale = std::pow(map.k, 2.0 * profile.gamma_prime * profile.r1 / 3.0 + 1.0);
  for (const auto& c : centers) {
    int n = 0;
    for (const auto& m : m2.points)
      if (triple_norm(m - c) <= profile.counting_radius) ++n;
    const double r = n / scale;
    st.ratios.push_back(r);
    st.max_ratio = std::max(st.max_ratio, r);
  }
  return st;
}

std::string regions_json(const RegionMap& map, const RegionStats& stats, const SeparationReport& sep,
                         const BoundaryReport& bnd) {
  nlohmann::json j;
  j["k"] = map.k;
  j["components"] = nlohmann::json::array();
  for (const auto& c : map.components) {
    std::array<int, 4> lo{}, hi{};
    lo.fill(std::numeric_limits<int>::max());
    hi.fill(std::numeric_limits<int>::min());
    for (const auto& m : c.indices)
      for (int i = 0; i < 4; ++i) {
        lo[i] = std::min(lo[i], m.coord(i));
        hi[i] = std::max(hi[i], m.coord(i));
      }
    j["components"].push_back({{"color", to_string(c.color)},
                               {"size", c.indices.size()},
                               {"bbox", {lo, hi}},
                               {"n_points", c.n_resonant_points},
                               {"boundary", c.boundary.size()}});
  }
  j["checks"] = {{"separation_pairs", sep.pairs_checked},
                 {"separation_violations", sep.violations},
                 {"separation_min_margin", sep.min_margin},
                 {"boundary_max_cross", bnd.max_cross},
                 {"boundary_max_rim", bnd.max_boundary},
                 {"counting_max_ratio", stats.max_ratio},
                 {"cross_color_merges", map.merges}};
  return j.dump(2);
}

int appendix4_count(const LatticeIndex& m, double k, double eps0, const PotentialSpec& spec, const QPParams& params,
                    const Profile& profile, int grid, std::vector<double>* roots) {
  const Vec2 p = dual_vector(m, params).p;
  LevelInputs in{&spec, &params, &profile, nullptr};
  auto f = [&](double phi) -> std::optional<double> {
    if (in_O1(phi, k, params, profile)) return std::nullopt;
    try {
      const double kap = solve_radius(1, k * k, phi, in).kappa;
      return eigenvalue_level(1, kap * nu(phi) + p, in).lambda - k * k - eps0;
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      return std::nullopt;
    }
  };
  const auto arcs = resonance_arcs(k, p, 0.5 * profile.T1);
  const int n = std::max(2, grid);
  int count = 0;
  for (const auto& arc : arcs.intervals()) {
    std::vector<double> xs(n + 1);
    std::vector<std::optional<double>> fs(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs[i] = arc.lo + arc.length() * i / n;
      fs[i] = f(xs[i]);
    }
    for (int i = 0; i < n; ++i) {
      if (!fs[i] || !fs[i + 1]) continue;
      if (*fs[i] == 0.0) {
        ++count;
        if (roots) roots->push_back(xs[i]);
        continue;
      }
      if ((*fs[i] < 0) == (*fs[i + 1] < 0)) continue;
      double a = xs[i], b = xs[i + 1], fa = *fs[i];
      for (int it = 0; it < 60 && b - a > profile.bisect_tol; ++it) {
        const double mid = 0.5 * (a + b);
        const auto fm = f(mid);
        if (!fm) break;
        if ((*fm < 0) == (fa < 0)) {
          a = mid;
          fa = *fm;
        } else {
          b = mid;
        }
      }
      ++count;
      if (roots) roots->push_back(0.5 * (a + b));
    }
  }
  return count;
}

}  // namespace qp
