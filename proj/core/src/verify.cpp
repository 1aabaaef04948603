#include "qp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "qp/band1d.hpp"
#include "qp/errors.hpp"
#include "qp/fiber.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/lattice.hpp"
#include "qp/multiscale.hpp"
#include "qp/perturb.hpp"
#include "qp/resonance.hpp"
#include "qp/wavefunction.hpp"

namespace qp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

bool numerical_failure(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NonConvergent:
    case ErrorKind::ContourHit:
    case ErrorKind::NoRoot:
    case ErrorKind::NotUnique:
    case ErrorKind::OverlapDetected:
    case ErrorKind::DimensionCap:
      return true;
    default:
      return false;
  }
}

Vec2 along(double phi) { return {std::cos(phi), std::sin(phi)}; }

// Shared state for one criterion: the potential, resolved profiles and a seeded generator.
class Context {
 public:
  Context(const RunConfig& cfg, int id)
      : cfg(cfg), spec(cfg.potential()), rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(id)) {}

  const Profile& profile(double k) {
    auto it = profiles_.find(k);
    if (it == profiles_.end()) it = profiles_.emplace(k, resolve(cfg.profile, k)).first;
    return it->second;
  }
  LevelInputs inputs(double k, const BlockProjector* P = nullptr) {
    return LevelInputs{&spec, &cfg.params, &profile(k), P};
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  double random_k() { return cfg.k_grid[static_cast<std::size_t>(pick(static_cast<int>(cfg.k_grid.size())))]; }
  double admissible_phi(double k) {
    for (int i = 0; i < 100000; ++i) {
      const double phi = uniform(0.0, 2.0 * kPi);
      if (!in_O1(phi, k, cfg.params, profile(k))) return phi;
    }
    throw NoRoot("no admissible angle found at k=" + std::to_string(k));
  }

  const RunConfig& cfg;
  PotentialSpec spec;
  std::mt19937_64 rng;

 private:
  std::map<double, Profile> profiles_;
};

double hermitian_defect(const Eigen::MatrixXcd& H) {
  if (H.size() == 0) return 0.0;
  return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Directions of the potential's generators, one per line through the origin.
std::vector<LatticeIndex> generator_directions(const PotentialSpec& spec) {
  std::vector<LatticeIndex> out;
  for (const auto& [q, v] : spec.generators) {
    if (q.is_zero()) continue;
    const LatticeIndex d = primitive_direction(q);
    bool seen = false;
    for (const auto& o : out) seen = seen || o == d || o == -d;
    if (!seen) out.push_back(d);
  }
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

void oracle_level1(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 1);
  const int n = cfg.verify.oracle1_points;
  double worst_ratio = 0.0, worst_err = 0.0, worst_tail = 0.0;
  int failed = 0, count_mismatch = 0;
  for (int i = 0; i < n; ++i) {
    const double k = ctx.random_k();
    const double phi = ctx.admissible_phi(k);
    const double kap = k + ctx.uniform(-1.0, 1.0) * level1_bracket(k * k, ctx.profile(k));
    SeriesOptions opts;
    opts.check_oracle = true;
    try {
      const auto r = eigenvalue_level(1, kap * along(phi), ctx.inputs(k), opts);
      if (!r.converged) ++failed;
      if (r.oracle_count != 1) ++count_mismatch;
      const double err = std::abs(r.lambda - *r.oracle_lambda);
      const double tol = std::max(1e-9 * k * k, 10.0 * r.tail);
      worst_ratio = std::max(worst_ratio, err / tol);
      worst_err = std::max(worst_err, err);
      worst_tail = std::max(worst_tail, r.tail);
    } catch (const NotUnique&) {
      ++count_mismatch;
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++failed;
    }
  }
  rec.measure("points", n);
  rec.measure("max_abs_error", worst_err);
  rec.measure("max_error_over_tolerance", worst_ratio);
  rec.measure("max_tail", worst_tail);
  rec.measure("nonconvergent", failed);
  rec.measure("oracle_count_mismatch", count_mismatch);
  rec.limit("max_error_over_tolerance", 1.0);
  rec.limit("nonconvergent", 0);
  rec.limit("oracle_count_mismatch", 0);
  rec.require(worst_ratio <= 1.0, "series eigenvalue differs from the oracle beyond tolerance");
  rec.require(count_mismatch == 0, "oracle finds other than one eigenvalue inside the contour");
  if (failed > 0) {
    rec.status = rec.status == CheckStatus::Pass ? CheckStatus::NonConvergent : rec.status;
    rec.notes.push_back(std::to_string(failed) + " series did not converge");
  }
}

void oracle_level2(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 2);
  const int n = cfg.verify.oracle2_points;
  double worst_ratio = 0.0, worst_err = 0.0;
  int done = 0, attempts = 0, redraw_poles = 0, redraw_numeric = 0, failed = 0, count_mismatch = 0, hierarchy = 0;
  while (done < n && attempts < 20 * n) {
    ++attempts;
    const double k = ctx.random_k();
    const double phi = ctx.admissible_phi(k);
    const auto in1 = ctx.inputs(k);
    double kappa1 = 0.0;
    LevelTwoSetup setup;
    try {
      kappa1 = solve_radius(1, k * k, phi, in1).kappa;
      setup = level_two_setup(phi, k, kappa1, ctx.spec, cfg.params, ctx.profile(k));
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++redraw_numeric;
      continue;
    }
    if (!setup.pole_free) {
      ++redraw_poles;
      continue;
    }
    ++done;
    const Vec2 kappa = kappa1 * along(phi);
    SeriesOptions opts;
    opts.check_oracle = true;
    try {
      const double lambda1 = eigenvalue_level(1, kappa, in1).lambda;
      const auto r = eigenvalue_level(2, kappa, ctx.inputs(k, &setup.P), opts);
      if (!r.converged) ++failed;
      const double err = std::abs(r.lambda - *r.oracle_lambda);
      const double tol = std::max(1e-9 * k * k, 10.0 * r.tail);
      worst_ratio = std::max(worst_ratio, err / tol);
      worst_err = std::max(worst_err, err);
      if (std::abs(r.lambda - lambda1) <= std::abs(lambda1 - kappa.squaredNorm())) ++hierarchy;
    } catch (const NotUnique&) {
      ++count_mismatch;
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++failed;
    }
  }
  const double frac = done > 0 ? static_cast<double>(hierarchy) / done : 0.0;
  rec.measure("points", done);
  rec.measure("redrawn_pole_near_base", redraw_poles);
  rec.measure("redrawn_numerical", redraw_numeric);
  rec.measure("max_abs_error", worst_err);
  rec.measure("max_error_over_tolerance", worst_ratio);
  rec.measure("nonconvergent", failed);
  rec.measure("oracle_count_mismatch", count_mismatch);
  rec.measure("hierarchy_fraction", frac);
  rec.limit("points", n);
  rec.limit("max_error_over_tolerance", 1.0);
  rec.limit("oracle_count_mismatch", 0);
  rec.limit("hierarchy_fraction", 0.95);
  rec.require(done == n, "could not draw enough admissible level-two points");
  rec.require(worst_ratio <= 1.0, "level-two eigenvalue differs from the oracle beyond tolerance");
  rec.require(count_mismatch == 0, "oracle finds other than one eigenvalue inside the contour");
  rec.require(frac >= 0.95, "level-two correction exceeds the level-one correction too often");
  if (failed > 0) {
    rec.status = rec.status == CheckStatus::Pass ? CheckStatus::NonConvergent : rec.status;
    rec.notes.push_back(std::to_string(failed) + " level-two series did not converge");
  }
}

void exact_identities(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 3);
  const auto dirs = generator_directions(ctx.spec);
  double herm = 0.0, sep_ratio = 0.0, interior_ratio = 0.0, outside = 0.0;
  std::size_t matrices = 0, cross = 0, core = 0, overlaps = 0, chains = 0, wavefunctions = 0;
  int skipped = 0;
  for (int i = 0; i < cfg.verify.identity_points; ++i) {
    const double k = cfg.k_grid[static_cast<std::size_t>(i) % cfg.k_grid.size()];
    const auto& prof = ctx.profile(k);
    const double phi = ctx.admissible_phi(k);
    const Vec2 kappa = k * along(phi);

    for (int radius : {prof.R, prof.R2}) {
      herm = std::max(herm, hermitian_defect(assemble(kappa, box_cached(radius), ctx.spec, cfg.params).H));
      ++matrices;
    }
    for (const auto& q : dirs) {
      const double t = ctx.uniform(-1.0, 1.0) * dual_vector(q, cfg.params).length();
      herm = std::max(herm, hermitian_defect(assemble_window(q, t, -4, 5, ctx.spec, cfg.params)));
      herm = std::max(herm, hermitian_defect(assemble_periodic(q, t, 8, ctx.spec, cfg.params)));
      matrices += 2;

      // Chain through a random centre along q.
      const auto& box = box_cached(prof.R2);
      ChainSubset chain;
      chain.central = box[static_cast<std::size_t>(ctx.pick(static_cast<int>(box.size())))];
      chain.n_minus = -3;
      chain.n_plus = 3;
      for (int m = -3; m <= 3; ++m) chain.points.push_back(chain.central + m * q);
      const Vec2 kr(ctx.uniform(-k, k), ctx.uniform(-k, k));
      const auto F = assemble(kr, chain.points, ctx.spec, cfg.params);
      sep_ratio = std::max(sep_ratio, separation_check(chain, q, kr, ctx.spec, cfg.params) / F.norm_bound);
      ++chains;
    }

    try {
      const auto in1 = ctx.inputs(k);
      const double kappa1 = solve_radius(1, k * k, phi, in1).kappa;
      const auto setup = level_two_setup(phi, k, kappa1, ctx.spec, cfg.params, prof);
      const auto orth = check_orthogonality(setup.P, ctx.spec);
      cross += orth.cross_entries;
      core += orth.core_entries;
      overlaps += orth.overlaps;
      for (const auto& b : setup.P.blocks) {
        herm = std::max(herm, hermitian_defect(assemble(kappa1 * along(phi), b.indices, ctx.spec, cfg.params).H));
        ++matrices;
      }
      const auto state = level2_state(kappa1 * along(phi), setup.P, ctx.spec, cfg.params, prof);
      herm = std::max(herm, hermitian_defect(full_operator(state)));
      ++matrices;

      const double hnorm = assemble(kappa1 * along(phi), box_cached(prof.R2), ctx.spec, cfg.params).norm_bound;
      std::vector<WaveFunction> wfs{synthesize(1, kappa1 * along(phi), in1)};
      if (setup.pole_free) wfs.push_back(synthesize(2, kappa1 * along(phi), ctx.inputs(k, &setup.P)));
      for (const auto& wf : wfs) {
        const auto res = residual(wf, ctx.spec, cfg.params);
        interior_ratio = std::max(interior_ratio, res.interior_max / hnorm);
        outside = std::max(outside, res.outside_max);
        ++wavefunctions;
      }
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++skipped;
    }
  }
  rec.measure("matrices", static_cast<double>(matrices));
  rec.measure("max_hermitian_defect", herm);
  rec.measure("chains", static_cast<double>(chains));
  rec.measure("max_separation_defect_over_norm", sep_ratio);
  rec.measure("cross_block_entries", static_cast<double>(cross));
  rec.measure("core_block_entries", static_cast<double>(core));
  rec.measure("block_overlaps", static_cast<double>(overlaps));
  rec.measure("wavefunctions", static_cast<double>(wavefunctions));
  rec.measure("max_interior_residual_over_norm", interior_ratio);
  rec.measure("max_outside_residual", outside);
  rec.measure("skipped_numerical", skipped);
  rec.limit("max_hermitian_defect", 0.0);
  rec.limit("max_separation_defect_over_norm", 1e-12);
  rec.limit("cross_block_entries", 0);
  rec.limit("max_interior_residual_over_norm", 1e-12);
  rec.limit("max_outside_residual", 0.0);
  rec.require(herm == 0.0, "an assembled matrix is not exactly Hermitian");
  rec.require(sep_ratio <= 1e-12, "chain operator does not separate into the one-dimensional operator");
  rec.require(cross == 0 && core == 0 && overlaps == 0, "projector blocks are coupled by the potential");
  rec.require(interior_ratio <= 1e-12, "residual does not vanish inside the support box");
  rec.require(outside == 0.0, "residual has support beyond the shell");
  rec.require(wavefunctions > 0, "no wavefunction could be synthesized");
}

void resonance_geometry(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 4);
  std::vector<double> excluded;
  std::size_t probes = 0, uncovered = 0, resonant_pairs = 0;
  for (double k : cfg.k_grid) {
    const auto& prof = ctx.profile(k);
    const auto o1 = build_omega1(k, cfg.params, prof);
    excluded.push_back(o1.excluded.measure());
    for (const auto& iv : o1.excluded.intervals()) {
      for (int j = 0; j <= 4; ++j) {
        const double phi = iv.lo + (iv.hi - iv.lo) * j / 4.0;
        ++probes;
        bool any = false, all = true;
        for (const auto& m : box_cached(prof.R_tilde)) {
          if (m.is_zero()) continue;
          const Vec2 p = dual_vector(m, cfg.params).p;
          if (std::abs(resonance_value(phi, k, p)) > prof.T1 * (1.0 + 1e-12)) continue;
          ++resonant_pairs;
          const bool c = resonance_discs(k, p, prof.T1, prof.tau).covers(phi);
          any = any || c;
          all = all && c;
        }
        if (!any || !all) ++uncovered;
      }
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < excluded.size(); ++i) monotone = monotone && excluded[i] <= excluded[i - 1];

  int windows = 0, violations = 0, skipped = 0, o2_oversized = 0, max_poles = 0;
  const int per_k = (cfg.verify.pole_windows + static_cast<int>(cfg.k_grid.size()) - 1) /
                    static_cast<int>(cfg.k_grid.size());
  for (std::size_t ki = 0; ki < cfg.k_grid.size() && windows < cfg.verify.pole_windows; ++ki) {
    const double k = cfg.k_grid[ki];
    const auto& prof = ctx.profile(k);
    std::vector<double> grid;
    for (int j = 0; j < per_k && windows + j < cfg.verify.pole_windows; ++j) grid.push_back(ctx.admissible_phi(k));
    std::sort(grid.begin(), grid.end());
    const auto srs = second_resonant_set(k, grid, ctx.spec, cfg.params, prof);
    skipped += srs.skipped;
    windows += static_cast<int>(grid.size());
    std::vector<double> poles;
    for (const auto& w : srs.windows) {
      violations += w.violations;
      for (const auto* group : {&w.m1_boxes, &w.subsets, &w.strong_clusters, &w.blocks})
        for (const auto& b : *group) max_poles = std::max(max_poles, b.poles);
      for (const auto& b : w.blocks) poles.insert(poles.end(), b.pole_phi.begin(), b.pole_phi.end());
    }
    for (const auto& iv : srs.O2.intervals()) {
      int inside = 0;
      for (double p : poles)
        if (angle_distance(p, 0.5 * (iv.lo + iv.hi)) <= 0.5 * iv.length() + prof.o2_disc) ++inside;
      if (iv.length() > inside * 2.0 * prof.o2_disc + 8.0 * kEps * 2.0 * kPi) ++o2_oversized;
    }
  }
  for (std::size_t i = 0; i < excluded.size(); ++i) rec.measure("excluded_measure_k" + fmt(cfg.k_grid[i]), excluded[i]);
  rec.measure("excluded_probes", static_cast<double>(probes));
  rec.measure("resonant_pairs", static_cast<double>(resonant_pairs));
  rec.measure("uncovered_probes", static_cast<double>(uncovered));
  rec.measure("windows", windows);
  rec.measure("windows_skipped", skipped);
  rec.measure("max_block_poles", max_poles);
  rec.measure("cap_violations", violations);
  rec.measure("oversized_O2_components", o2_oversized);
  rec.limit("uncovered_probes", 0);
  rec.limit("cap_violations", 0);
  rec.limit("oversized_O2_components", 0);
  rec.require(monotone, "excluded measure increases along the k-grid");
  rec.require(uncovered == 0, "an excluded angle is not covered by the resonance discs");
  rec.require(violations == 0, "a block exceeds its pole cap");
  rec.require(o2_oversized == 0, "an O2 component exceeds its pole budget");
  rec.require(windows - skipped > 0, "no admissible window was examined");
}

void lattice_counting(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 5);
  int cases = 0, l1_applicable = 0, l1_fail = 0, l3_applicable = 0, l3_fail = 0, l2_fail = 0;
  double l1_size = 0.0, l1_sep = std::numeric_limits<double>::infinity(), l2_ratio = 0.0, l3_ratio = 0.0;
  std::vector<QPParams> alphas{cfg.params};
  if (!cfg.verify.lattice_cf.empty()) alphas.push_back(QPParams::from_continued_fraction(cfg.verify.lattice_cf));
  for (const auto& params : alphas)
    for (double r : cfg.verify.lattice_r)
      for (double k : cfg.k_grid) {
        ++cases;
        const double kr = std::pow(k, r);
        const auto ap = best_rational(params, k, r);
        const double q = static_cast<double>(ap.q);
        const double eps = std::abs(ap.eps_q);
        if (eps <= 1.0 / (64.0 * q * kr)) {
          ++l1_applicable;
          const auto st = cluster_stats_product(static_cast<int>(std::floor(4.0 * kr)), ap, params);
          l1_size = std::max(l1_size, st.cluster_diameter * 8.0 * q);
          l1_sep = std::min(l1_sep, st.min_separation * 2.0 * q);
          if (!(st.cluster_diameter < 1.0 / (8.0 * q)) || !(st.min_separation > 1.0 / (2.0 * q))) ++l1_fail;
        }
        const int radius = static_cast<int>(std::ceil(2.0 * kr)) - 1;
        const double bound2 = std::pow(k, 2.0 * r / 3.0);
        const auto n2 = count_short_vectors(radius, eps * q * std::pow(k, r / 3.0), params);
        l2_ratio = std::max(l2_ratio, static_cast<double>(n2) / bound2);
        if (static_cast<double>(n2) > bound2) ++l2_fail;
        if (q > bound2) {
          ++l3_applicable;
          const auto n3 = count_short_vectors(radius, 1.0 / bound2, params);
          l3_ratio = std::max(l3_ratio, static_cast<double>(n3) / (4096.0 * bound2));
          if (static_cast<double>(n3) > 4096.0 * bound2) ++l3_fail;
        }
      }

  // Points near the level-one isoenergetic curve.
  const double r = cfg.verify.counting_r;
  double d1_ratio = 0.0, d1_max_count = 0.0, d1_wide = 0.0;
  int d1_samples = 0;
  for (double k : cfg.k_grid) {
    const auto& prof = ctx.profile(k);
    const auto in = ctx.inputs(k);
    const double kr = std::pow(k, r);
    const double eps0 = std::pow(k, -5.0 * prof.mu * r);
    const double br = level1_bracket(k * k, prof);
    const CurveRadius radius_of = [&](double phi) -> std::optional<double> {
      if (in_O1(phi, k, cfg.params, prof)) return std::nullopt;
      try {
        return solve_radius(1, k * k, phi, in).kappa;
      } catch (const Error& e) {
        if (!numerical_failure(e)) throw;
        return std::nullopt;
      }
    };
    const double bound = 1000.0 * std::pow(k, 2.0 * r / 3.0 + 1.0);
    for (int i = 0; i < cfg.verify.counting_kappa0; ++i) {
      const double phi = ctx.uniform(0.0, 2.0 * kPi);
      const double rad = ctx.uniform(0.0, 2.0 * k);
      const Vec2 kappa0 = rad * along(phi);
      const auto n = count_near_curve(kappa0, static_cast<int>(std::ceil(kr)) - 1, eps0, radius_of, k - br, k + br,
                                      cfg.params);
      d1_ratio = std::max(d1_ratio, static_cast<double>(n) / bound);
      d1_max_count = std::max(d1_max_count, static_cast<double>(n));
      if (i == 0) {
        // A much wider neighborhood, to show the count is not empty by construction.
        const auto wide = count_near_curve(kappa0, static_cast<int>(std::ceil(kr)) - 1, 1.0 / k, radius_of, k - br,
                                           k + br, cfg.params);
        d1_wide = std::max(d1_wide, static_cast<double>(wide));
      }
      ++d1_samples;
    }
  }
  rec.measure("cases", cases);
  rec.measure("rotation_numbers", static_cast<double>(alphas.size()));
  rec.measure("cluster_lemma_applicable", l1_applicable);
  rec.measure("max_cluster_size_times_8q", l1_size);
  rec.measure("min_cluster_separation_times_2q", l1_applicable > 0 ? l1_sep : 0.0);
  rec.measure("max_short_vector_ratio", l2_ratio);
  rec.measure("very_short_lemma_applicable", l3_applicable);
  rec.measure("max_very_short_ratio", l3_ratio);
  rec.measure("curve_samples", d1_samples);
  rec.measure("max_curve_count", d1_max_count);
  rec.measure("max_curve_ratio", d1_ratio);
  rec.measure("max_curve_count_eps_inverse_k", d1_wide);
  rec.limit("max_cluster_size_times_8q", 1.0);
  rec.limit("min_cluster_separation_times_2q", 1.0);
  rec.limit("max_short_vector_ratio", 1.0);
  rec.limit("max_very_short_ratio", 1.0);
  rec.limit("max_curve_ratio", 1.0);
  rec.require(l1_fail == 0, "cluster size or separation bound violated");
  rec.require(l2_fail == 0, "too many short vectors");
  rec.require(l3_fail == 0, "too many very short vectors");
  rec.require(d1_ratio <= 1.0, "too many lattice points near the isoenergetic curve");
  if (l1_applicable == 0) rec.notes.push_back("cluster lemma hypothesis never held on this grid");
  if (l3_applicable == 0) rec.notes.push_back("very-short-vector lemma hypothesis never held on this grid");
}

void series_structure(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 6);
  const int qmax = ctx.spec.max_support_norm();
  double g1 = 0.0, g2_rel = 0.0, forbidden_q = 0.0, forbidden_sharp = 0.0, idem = 0.0, rank_defect = 0.0;
  std::size_t sharp_entries = 0;
  int points = 0, failed = 0;
  for (int i = 0; i < cfg.verify.identity_points; ++i) {
    const double k = cfg.k_grid[static_cast<std::size_t>(i) % cfg.k_grid.size()];
    const auto& prof = ctx.profile(k);
    const double phi = ctx.admissible_phi(k);
    const Vec2 kappa = k * along(phi);
    SeriesResult r;
    try {
      r = projector_level(1, kappa, ctx.inputs(k));
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++failed;
      continue;
    }
    ++points;
    if (r.g.size() > 1) g1 = std::max(g1, std::abs(r.g[1]));
    if (r.g.size() > 2) {
      const double cf = second_order_closed_form(kappa, ctx.spec, cfg.params, prof.R);
      g2_rel = std::max(g2_rel, std::abs(r.g[2] - cf) / std::abs(cf));
    }
    const auto& idx = box_cached(prof.R);
    for (std::size_t rr = 1; rr < r.G.size(); ++rr)
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) {
          const int s = triple_norm(idx[a]) + triple_norm(idx[b]);
          const double v = std::abs(r.G[rr](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
          if (static_cast<int>(rr) * cfg.Q < s) forbidden_q = std::max(forbidden_q, v);
          if (static_cast<int>(rr) * qmax < s) {
            forbidden_sharp = std::max(forbidden_sharp, v);
            ++sharp_entries;
          }
        }
    idem = std::max(idem, (r.E * r.E - r.E).norm());
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.E);
    const auto& sv = svd.singularValues();
    double rest = sv.size() > 1 ? sv(1) : 0.0;
    rank_defect = std::max({rank_defect, rest, std::abs(sv(0) - 1.0)});
  }
  rec.measure("points", points);
  rec.measure("max_abs_g1", g1);
  rec.measure("max_g2_relative_error", g2_rel);
  rec.measure("max_forbidden_entry_Q", forbidden_q);
  rec.measure("max_forbidden_entry_support_norm", forbidden_sharp);
  rec.measure("forbidden_entries_support_norm", static_cast<double>(sharp_entries));
  rec.measure("max_idempotency_defect", idem);
  rec.measure("max_rank_one_defect", rank_defect);
  rec.measure("nonconvergent", failed);
  rec.limit("max_abs_g1", 1e-12);
  rec.limit("max_g2_relative_error", 1e-10);
  rec.limit("max_forbidden_entry_Q", 0.0);
  rec.limit("max_forbidden_entry_support_norm", 0.0);
  rec.limit("max_idempotency_defect", 1e-8);
  rec.limit("max_rank_one_defect", 1e-8);
  rec.require(g1 <= 1e-12, "first-order coefficient does not vanish");
  rec.require(g2_rel <= 1e-10, "second-order coefficient differs from the closed form");
  rec.require(forbidden_q == 0.0 && forbidden_sharp == 0.0, "series term has entries outside its support");
  rec.require(idem <= 1e-8, "projector is not idempotent");
  rec.require(rank_defect <= 1e-8, "projector is not rank one");
  rec.require(points > 0, "no point converged");
  if (failed > 0 && rec.status == CheckStatus::Pass) rec.status = CheckStatus::NonConvergent;
}

void isoenergetic_curves(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 7);
  const PotentialSpec free = build({}, cfg.Q, cfg.params);
  const auto grid1 = uniform_phi_grid(cfg.phi_grid);
  const auto grid2 = uniform_phi_grid(cfg.phi_grid_level2);
  std::vector<double> sup_h, deltas;
  double residual = 0.0, free_defect = 0.0;
  int not_nested = 0, admissible2 = 0, free_samples = 0;
  for (double lambda : cfg.lambda_grid) {
    const double k = std::sqrt(lambda);
    const auto& prof = ctx.profile(k);
    const auto c1 = trace_curve1(lambda, grid1, ctx.spec, cfg.params, prof);
    for (const auto& s : c1.samples)
      if (s.admissible) residual = std::max(residual, std::abs(s.residual) / lambda);
    sup_h.push_back(sup_abs_h(c1));

    const auto c1b = trace_curve1(lambda, grid2, ctx.spec, cfg.params, prof);
    const auto c2 = trace_curve2(c1b, ctx.spec, cfg.params, prof);
    for (std::size_t i = 0; i < c2.samples.size(); ++i) {
      if (!c2.samples[i].admissible) continue;
      ++admissible2;
      residual = std::max(residual, std::abs(c2.samples[i].residual) / lambda);
      if (!c1b.samples[i].admissible) ++not_nested;
    }
    deltas.push_back(curve_delta(c1b, c2).sup);

    const auto c0 = trace_curve1(lambda, grid2, free, cfg.params, prof);
    for (const auto& s : c0.samples)
      if (s.admissible) {
        ++free_samples;
        free_defect = std::max(free_defect, std::abs(s.kappa - std::sqrt(lambda)));
      }
  }
  for (std::size_t i = 0; i < sup_h.size(); ++i) {
    rec.measure("sup_h1_lambda" + fmt(cfg.lambda_grid[i]), sup_h[i]);
    rec.measure("sup_delta2_lambda" + fmt(cfg.lambda_grid[i]), deltas[i]);
  }
  rec.measure("max_residual_over_lambda", residual);
  rec.measure("free_samples", free_samples);
  rec.measure("free_radius_defect", free_defect);
  rec.measure("level2_admissible", admissible2);
  rec.measure("level2_not_in_level1", not_nested);
  rec.limit("max_residual_over_lambda", 1e-9);
  rec.limit("free_radius_defect", 0.0);
  rec.limit("level2_not_in_level1", 0);
  rec.require(residual <= 1e-9, "radius solve residual too large");
  rec.require(free_defect == 0.0 && free_samples > 0, "free operator does not give the circle of radius sqrt(lambda)");
  rec.require(strictly_decreasing(sup_h), "sup |h1| is not strictly decreasing along the energy grid");
  rec.require(strictly_decreasing(deltas), "level-two correction is not strictly decreasing along the energy grid");
  rec.require(not_nested == 0, "level-two admissible set is not inside the level-one set");
  rec.require(admissible2 > 0, "no level-two admissible sample");
}

void derivatives(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 8);
  const double h = 1e-2;
  double rel = 0.0, g2_abs = 0.0, g2_rel = 0.0, full_abs = 0.0;
  int points = 0, failed = 0;
  for (int i = 0; i < cfg.verify.derivative_points; ++i) {
    const double k = ctx.random_k();
    const auto& prof = ctx.profile(k);
    const double phi = ctx.admissible_phi(k);
    const auto in = ctx.inputs(k);
    try {
      const auto d = derivative_probe(1, k, phi, h, in);
      rel = std::max(rel, std::abs(d.d_kappa - 2.0 * k) / (2.0 * k));
      // Five-point stencil on the series' own second-order coefficient.
      auto g2 = [&](double kap) { return eigenvalue_level(1, kap * along(phi), in).g.at(2); };
      const double fd_g2 = (g2(k - 2.0 * h) - 8.0 * g2(k - h) + 8.0 * g2(k + h) - g2(k + 2.0 * h)) / (12.0 * h);
      const double an = second_order_closed_form_dkappa(k, phi, ctx.spec, cfg.params, prof.R);
      g2_abs = std::max(g2_abs, std::abs(fd_g2 - an));
      g2_rel = std::max(g2_rel, std::abs(fd_g2 - an) / std::abs(an));
      full_abs = std::max(full_abs, std::abs(d.d_kappa - 2.0 * k - an));
      ++points;
    } catch (const Error& e) {
      if (!numerical_failure(e)) throw;
      ++failed;
    }
  }
  rec.measure("points", points);
  rec.measure("max_relative_error_vs_2kappa", rel);
  rec.measure("max_g2_derivative_abs_error", g2_abs);
  rec.measure("max_g2_derivative_relative_error", g2_rel);
  rec.measure("max_full_correction_derivative_minus_g2_derivative", full_abs);
  rec.measure("nonconvergent", failed);
  rec.limit("max_relative_error_vs_2kappa", 1e-3);
  rec.limit("max_g2_derivative_relative_error", 1e-6);
  rec.require(rel <= 1e-3, "derivative differs from 2 kappa");
  rec.require(g2_rel <= 1e-6, "second-order coefficient derivative differs from its closed form");
  if (failed > 0 && rec.status == CheckStatus::Pass) rec.status = CheckStatus::NonConvergent;
}

// Gap sequence must shrink strictly until it reaches the rounding floor, then stay below it.
bool refines(const std::vector<double>& gaps, double floor) {
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    if (gaps[i - 1] > floor) {
      if (!(gaps[i] < gaps[i - 1])) return false;
    } else if (gaps[i] > floor) {
      return false;
    }
  }
  return true;
}

void band_oracle(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 9);
  const int J = cfg.verify.band_windows;
  const double vsum = ctx.spec.l1_norm();
  auto floor_for = [&](const LatticeIndex& q, double t, int width) {
    const double pq = dual_vector(q, cfg.params).length();
    const double top = reference_truncation(width) * pq + std::abs(t);
    return 16.0 * kEps * (top * top + vsum);
  };
  int sequences = 0, bad = 0, encountered = 0;
  double first_gap = 0.0, last_gap = 0.0;
  auto test = [&](const LatticeIndex& q, double t, int lo, int hi) {
    std::vector<double> gaps;
    for (int j = 0; j <= J; ++j) gaps.push_back(finite_vs_periodic(q, t, lo - j, hi + j, ctx.spec, cfg.params));
    ++sequences;
    first_gap = std::max(first_gap, gaps.front());
    last_gap = std::max(last_gap, gaps.back());
    if (!refines(gaps, floor_for(q, t, hi - lo + 1 + 2 * J))) ++bad;
  };

  // Every non-trivial chain cluster met on a scan of base angles.
  const int scan = std::max(8, cfg.phi_grid / 16);
  for (double k : cfg.k_grid) {
    const auto& prof = ctx.profile(k);
    for (int i = 0; i < scan; ++i) {
      const double phi = 2.0 * kPi * (i + 0.5) / scan;
      if (in_O1(phi, k, cfg.params, prof)) continue;
      const auto d = classify(phi, k, prof.R2, ctx.spec, cfg.params, prof);
      for (const auto& cls : d.classes) {
        if (cls.trivial || !cls.has_direction) continue;
        for (const auto& s : cls.subsets) {
          ++encountered;
          test(cls.direction, s.t_q, s.n_minus, s.n_plus);
        }
      }
    }
  }
  // Chains built along each generator direction across the Brillouin zone.
  const auto dirs = generator_directions(ctx.spec);
  for (const auto& q : dirs) {
    const double pq = dual_vector(q, cfg.params).length();
    for (int i = 0; i < 5; ++i) test(q, pq * (-0.5 + 0.2 * i + 0.05), -1, 1);
  }

  // Periodicity in t.
  double period_err = 0.0, period_tol = std::numeric_limits<double>::infinity();
  const int N = 32;
  for (const auto& q : dirs) {
    const double pq = dual_vector(q, cfg.params).length();
    for (int i = 0; i < 5; ++i) {
      const double t = pq * (-0.5 + 0.2 * i + 0.05);
      const auto a = eig_hermitian(assemble_periodic(q, t, N, ctx.spec, cfg.params), false).eigenvalues;
      const auto b = eig_hermitian(assemble_periodic(q, t + pq, N, ctx.spec, cfg.params), false).eigenvalues;
      for (Eigen::Index n = 0; n < 4; ++n) period_err = std::max(period_err, std::abs(a(n) - b(n)));
      const double top = (N + 1) * pq + std::abs(t);
      period_tol = std::min(period_tol, 16.0 * kEps * (top * top + vsum));
    }
  }
  rec.measure("clusters_encountered", encountered);
  rec.measure("sequences", sequences);
  rec.measure("max_coarsest_gap", first_gap);
  rec.measure("max_finest_gap", last_gap);
  rec.measure("sequences_not_refining", bad);
  rec.measure("max_periodicity_error", period_err);
  rec.limit("sequences_not_refining", 0);
  rec.limit("max_periodicity_error", period_tol);
  rec.require(bad == 0, "finite-window gap does not decrease under refinement");
  rec.require(period_err <= period_tol, "bands are not periodic in t");
  if (encountered == 0) rec.notes.push_back("no non-trivial chain cluster met on the scan; constructed chains only");
}

void multiscale_structure(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 10);
  int maps = 0, nondeterministic = 0, not_idempotent = 0, sep_violations = 0, failed = 0, redrawn = 0, core_hits = 0;
  double cross = 0.0, boundary = 0.0, ratio = 0.0;
  std::size_t m2_points = 0, components = 0;
  std::vector<double> per_k;
  for (double k : cfg.k_grid) {
    const auto& prof = ctx.profile(k);
    double kmax = 0.0;
    for (int i = 0; i < cfg.verify.multiscale_points; ++i) {
      // Base angles come from the level-two admissible set.
      double phi = 0.0, kappa1 = 0.0;
      bool found = false;
      for (int attempt = 0; attempt < 50 && !found; ++attempt) {
        phi = ctx.admissible_phi(k);
        try {
          kappa1 = solve_radius(1, k * k, phi, ctx.inputs(k)).kappa;
          found = level_two_setup(phi, k, kappa1, ctx.spec, cfg.params, prof).pole_free;
        } catch (const Error& e) {
          if (!numerical_failure(e)) throw;
        }
        if (!found) ++redrawn;
      }
      M2Set m2;
      try {
        if (!found) throw NonConvergent("no level-two admissible angle found");
        m2 = build_M2set(phi, k, kappa1, ctx.spec, cfg.params, prof);
      } catch (const Error& e) {
        if (!numerical_failure(e)) throw;
        ++failed;
        continue;
      }
      ++maps;
      m2_points += m2.points.size();
      core_hits += m2.core_violations;
      const auto map = region_map(m2, k, cfg.params, ctx.spec, prof);
      components += map.components.size();
      if (!same_map(map, region_map(m2, k, cfg.params, ctx.spec, prof))) ++nondeterministic;
      if (!same_map(map, merge_components(map, ctx.spec, prof))) ++not_idempotent;
      sep_violations += check_separations(map, prof).violations;
      const auto b = boundary_check(map, ctx.spec);
      cross = std::max(cross, b.max_cross);
      boundary = std::max(boundary, b.max_boundary);
      const auto& box = box_cached(prof.R3);
      std::vector<LatticeIndex> centers;
      for (int c = 0; c < cfg.verify.counting_centers; ++c)
        centers.push_back(box[static_cast<std::size_t>(ctx.pick(static_cast<int>(box.size())))]);
      const auto st = region_stats(map, m2, centers, prof);
      kmax = std::max(kmax, st.max_ratio);
    }
    per_k.push_back(kmax);
    ratio = std::max(ratio, kmax);
  }
  rec.measure("maps", maps);
  rec.measure("redrawn_level2_resonant", redrawn);
  rec.measure("m2_points", static_cast<double>(m2_points));
  rec.measure("m2_points_in_level2_box", core_hits);
  rec.measure("components", static_cast<double>(components));
  rec.measure("nondeterministic_maps", nondeterministic);
  rec.measure("non_idempotent_maps", not_idempotent);
  rec.measure("separation_violations", sep_violations);
  rec.measure("max_cross_component_coupling", cross);
  rec.measure("max_interior_to_complement_coupling", boundary);
  for (std::size_t i = 0; i < per_k.size(); ++i) rec.measure("max_counting_ratio_k" + fmt(cfg.k_grid[i]), per_k[i]);
  rec.measure("max_counting_ratio", ratio);
  rec.measure("nonconvergent", failed);
  rec.limit("m2_points_in_level2_box", 0);
  rec.limit("separation_violations", 0);
  rec.limit("max_cross_component_coupling", 0.0);
  rec.limit("max_interior_to_complement_coupling", 0.0);
  rec.limit("max_counting_ratio", cfg.verify.counting_constant);
  rec.require(nondeterministic == 0, "region map is not deterministic");
  rec.require(not_idempotent == 0, "merging is not idempotent");
  rec.require(core_hits == 0, "resonant set reaches into the level-two box");
  rec.require(sep_violations == 0, "same-color components are too close");
  rec.require(cross == 0.0 && boundary == 0.0, "boundary identities fail");
  rec.require(ratio <= cfg.verify.counting_constant, "counting ratio exceeds the recorded constant");
  rec.require(maps > 0, "no region map was built");
  if (failed > 0 && rec.status == CheckStatus::Pass) rec.status = CheckStatus::NonConvergent;
}

void eigenfunction_quality(const RunConfig& cfg, CheckRecord& rec) {
  Context ctx(cfg, 11);
  const double phi = cfg.verify.eigenfunction_phi;
  const int n = cfg.verify.eigenfunction_grid;
  std::vector<double> sup_u, res_l1;
  double dom = 0.0;
  int level2 = 0;
  for (double k : cfg.k_grid) {
    const auto& prof = ctx.profile(k);
    if (in_O1(phi, k, cfg.params, prof)) {
      rec.require(false, "eigenfunction angle is resonant at k=" + fmt(k));
      continue;
    }
    const auto in1 = ctx.inputs(k);
    const double kappa1 = solve_radius(1, k * k, phi, in1).kappa;
    const Vec2 kappa = kappa1 * along(phi);
    const auto w1 = synthesize(1, kappa, in1);
    sup_u.push_back(sample(w1, plane_wave(kappa), cfg.params, n).sup_u);
    res_l1.push_back(residual(w1, ctx.spec, cfg.params).l1);
    const auto setup = level_two_setup(phi, k, kappa1, ctx.spec, cfg.params, prof);
    if (!setup.pole_free) continue;
    const auto w2 = synthesize(2, kappa, ctx.inputs(k, &setup.P));
    const double lhs = grid_sup_difference(w2, w1, cfg.params, n);
    const double rhs = coefficient_l1_distance(w2, w1);
    dom = std::max(dom, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    ++level2;
  }
  for (std::size_t i = 0; i < sup_u.size(); ++i) {
    rec.measure("sup_u1_k" + fmt(cfg.k_grid[i]), sup_u[i]);
    rec.measure("residual_l1_k" + fmt(cfg.k_grid[i]), res_l1[i]);
  }
  rec.measure("level2_points", level2);
  rec.measure("max_grid_sup_over_l1_distance", dom);
  rec.limit("max_grid_sup_over_l1_distance", 1.0 + 1e-12);
  rec.require(strictly_decreasing(sup_u), "sup |u1| is not strictly decreasing along the k-grid");
  rec.require(strictly_decreasing(res_l1), "residual l1 norm is not strictly decreasing along the k-grid");
  rec.require(dom <= 1.0 + 1e-12, "level difference exceeds its coefficient l1 bound");
  rec.require(level2 > 0, "no pole-free level-two point on the k-grid");
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NonConvergent: return "nonconvergent";
  }
  return "unknown";
}

void CheckRecord::require(bool ok, const std::string& why) {
  if (ok) return;
  status = CheckStatus::Fail;
  notes.push_back(why);
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "oracle-level1",
       "level-one series eigenvalue against dense diagonalization; exactly one eigenvalue inside the contour", 60,
       oracle_level1},
      {2, "oracle-level2",
       "level-two series eigenvalue against dense diagonalization of the block model; level-two correction below "
       "the level-one correction",
       300, oracle_level2},
      {3, "exact-identities",
       "Hermitian assembly; chain separation into the one-dimensional operator; projector blocks uncoupled by V; "
       "residual supported on the shell",
       30, exact_identities},
      {4, "resonance-geometry",
       "excluded measure monotone in k; resonance discs cover every excluded angle; per-block pole caps", 180,
       resonance_geometry},
      {5, "lattice-counting",
       "cluster size and separation, short-vector counts and the count of lattice points near the isoenergetic "
       "curve, by exhaustive enumeration",
       120, lattice_counting},
      {6, "series-structure",
       "vanishing first-order term; second-order closed form; support of the series terms; rank-one idempotent "
       "projector",
       30, series_structure},
      {7, "isoenergetic-curves",
       "radius solve residual; free circle; decreasing corrections along the energy grid; nested admissible sets",
       180, isoenergetic_curves},
      {8, "derivatives", "finite-difference radial derivative against 2 kappa and the second-order derivative", 30,
       derivatives},
      {9, "band-oracle", "finite-window gap decreasing under refinement; band periodicity in the quasi-momentum", 60,
       band_oracle},
      {10, "multiscale-structure",
       "region map determinism and idempotency; resonant set outside the level-two box; same-color separations; boundary identities; bounded counting ratio",
       120, multiscale_structure},
      {11, "eigenfunction-quality",
       "sup |u1| and residual l1 decreasing in k; level difference bounded by coefficient l1 distance", 60,
       eigenfunction_quality},
  };
  return list;
}

CheckRecord run_criterion(const Criterion& c, const RunConfig& cfg, const VerifyOptions& opts) {
  CheckRecord rec;
  rec.id = c.id;
  rec.name = c.name;
  rec.checks = c.checks;
  rec.budget = c.budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(cfg, rec);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rec.status = numerical_failure(e) ? CheckStatus::NonConvergent : CheckStatus::Fail;
    rec.notes.push_back(std::string(to_string(e.kind())) + ": " + e.what());
  }
  rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opts.timing && rec.runtime > rec.budget) {
    rec.status = CheckStatus::Fail;
    rec.notes.push_back("runtime " + fmt(rec.runtime) + " s exceeds the " + fmt(rec.budget) + " s budget");
  }
  return rec;
}

std::string to_json_line(const CheckRecord& r, bool timing) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["checks"] = r.checks;
  j["status"] = to_string(r.status);
  nlohmann::ordered_json m = nlohmann::ordered_json::object(), t = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.measured) m[k] = v;
  for (const auto& [k, v] : r.threshold) t[k] = v;
  j["measured"] = m;
  j["threshold"] = t;
  j["notes"] = r.notes;
  if (timing) {
    j["runtime"] = r.runtime;
    j["budget"] = r.budget;
  }
  return j.dump();
}

std::vector<CheckRecord> run_verify(const RunConfig& cfg, const VerifyOptions& opts, std::ostream& out,
                                    const std::function<void(const CheckRecord&)>& on_record) {
  std::vector<CheckRecord> records;
  for (const auto& c : criteria()) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), c.id) == opts.only.end()) continue;
    records.push_back(run_criterion(c, cfg, opts));
    out << to_json_line(records.back(), opts.timing) << '\n' << std::flush;
    if (on_record) on_record(records.back());
  }
  return records;
}

int exit_code(const std::vector<CheckRecord>& records) {
  bool fail = false, nonconv = false;
  for (const auto& r : records) {
    fail = fail || r.status == CheckStatus::Fail;
    nonconv = nonconv || r.status == CheckStatus::NonConvergent;
  }
  if (fail) return 1;
  return nonconv ? 3 : 0;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Report lines compare without their timing fields; other lines compare verbatim.
std::string comparable(const std::string& line) {
  if (line.empty() || line.front() != '{') return line;
  try {
    auto j = nlohmann::ordered_json::parse(line);
    if (j.is_object()) {
      j.erase("runtime");
      j.erase("budget");
    }
    return j.dump();
  } catch (const nlohmann::json::parse_error&) {
    return line;
  }
}

}  // namespace

DiffResult diff_outputs(const std::string& path_a, const std::string& path_b) {
  const auto a = read_lines(path_a), b = read_lines(path_b);
  DiffResult d;
  d.lines_a = a.size();
  d.lines_b = b.size();
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const std::string la = i < a.size() ? comparable(a[i]) : "<missing>";
    const std::string lb = i < b.size() ? comparable(b[i]) : "<missing>";
    if (la != lb) {
      d.identical = false;
      d.differences.push_back("line " + std::to_string(i + 1) + ": " + la + " | " + lb);
    }
  }
  return d;
}

}  // namespace qp
