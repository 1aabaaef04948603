#include "qp/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qp/errors.hpp"
#include "qp/fiber.hpp"

namespace qp {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::SparseMatrix<cplx> coupling(const std::vector<LatticeIndex>& indices, const std::vector<int>& block_of,
                                   const PotentialSpec& spec) {
  const IndexMap pos(indices);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (const auto& [q, v] : spec.nonzero()) {
      const int j = pos.find(indices[i] - q);
      if (j < 0) continue;
      const bool same = block_of[i] >= 0 && block_of[i] == block_of[static_cast<std::size_t>(j)];
      if (!same) trip.emplace_back(static_cast<int>(i), j, v);
    }
  const auto n = static_cast<Eigen::Index>(indices.size());
  Eigen::SparseMatrix<cplx> W(n, n);
  W.setFromTriplets(trip.begin(), trip.end());
  return W;
}

void check_contour(const LevelState& s, const Profile& profile) {
  const double c = s.contour.center, rho = s.contour.radius;
  if (!(rho > 0)) throw ContourHit("contour radius must be positive");
  for (double e : s.model_eigenvalues)
    if (std::abs(std::abs(e - c) - rho) < profile.contour_hit * rho) {
      std::ostringstream os;
      os << "model eigenvalue " << e << " lies on the contour |z - " << c << "| = " << rho;
      throw ContourHit(os.str());
    }
}

// B(z) applies the model resolvent with the target eigenvector projected out.
void apply_B(const LevelState& s, const Eigen::VectorXcd& x, cplx z, Eigen::VectorXcd& y) {
  y.setZero(x.size());
  for (std::size_t i = 0; i < s.single_pos.size(); ++i) {
    const int p = s.single_pos[i];
    if (s.target_block < 0 && p == s.target_pos) continue;
    y(p) = x(p) / (s.single_val[i] - z);
  }
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const auto& blk = s.blocks[b];
    const auto m = static_cast<Eigen::Index>(blk.positions.size());
    Eigen::VectorXcd xb(m);
    for (Eigen::Index i = 0; i < m; ++i) xb(i) = x(blk.positions[static_cast<std::size_t>(i)]);
    Eigen::VectorXcd c = blk.evecs.adjoint() * xb;
    for (Eigen::Index i = 0; i < m; ++i) c(i) /= (blk.evals(i) - z);
    if (static_cast<int>(b) == s.target_block) c(s.target_eig) = 0.0;
    const Eigen::VectorXcd yb = blk.evecs * c;
    for (Eigen::Index i = 0; i < m; ++i) y(blk.positions[static_cast<std::size_t>(i)]) = yb(i);
  }
}

struct Accum {
  std::vector<cplx> g;
  std::vector<Eigen::VectorXcd> col;
  std::vector<Eigen::MatrixXcd> full;
};

struct Workspace {
  std::vector<Eigen::VectorXcd> l, lbar, T;
  std::vector<cplx> c, cbar, phi, a, G, rho;
  Eigen::VectorXcd wl;
};

// Chain vectors l_s = (B W)^s v0 and scalars c_s = <v0| W l_s>, cut once W l_s is negligible.
int chain(const LevelState& s, cplx z, int R, std::vector<Eigen::VectorXcd>& l, std::vector<cplx>& c,
          Eigen::VectorXcd& wl) {
  const double tiny = 1e-20 * std::max(1.0, std::abs(s.e0));
  l.resize(static_cast<std::size_t>(R) + 1);
  c.assign(static_cast<std::size_t>(R), 0.0);
  l[0] = s.v0;
  int J = 0;
  for (int j = 0; j < R; ++j) {
    wl.noalias() = s.W * l[static_cast<std::size_t>(j)];
    c[static_cast<std::size_t>(j)] = s.v0.dot(wl);
    J = j;
    if (j > 0 && wl.norm() <= tiny) break;
    apply_B(s, wl, z, l[static_cast<std::size_t>(j) + 1]);
    J = j + 1;
  }
  return J;  // l_0..l_J are populated
}

void add_node(const LevelState& s, cplx z, cplx weight, int R, bool full, Accum& acc, Workspace& ws) {
  const int J = chain(s, z, R, ws.l, ws.c, ws.wl);
  const cplx inv = 1.0 / (s.e0 - z);
  ws.phi.assign(R + 1, 0.0);
  ws.a.assign(R + 1, 0.0);
  ws.G.assign(R + 1, 0.0);
  ws.rho.assign(R + 1, 0.0);
  for (int g = 1; g <= R; ++g) ws.phi[g] = ws.c[g - 1] * inv;
  // a = log(1 - phi) by the power-series logarithm recursion.
  ws.G[0] = 1.0;
  for (int n = 1; n <= R; ++n) ws.G[n] = -ws.phi[n];
  for (int n = 1; n <= R; ++n) {
    cplx acc_n = ws.G[n];
    for (int j = 1; j < n; ++j) acc_n -= (static_cast<double>(j) / n) * ws.a[j] * ws.G[n - j];
    ws.a[n] = acc_n;
  }
  ws.rho[0] = 1.0;
  for (int n = 1; n <= R; ++n) {
    cplx t = 0.0;
    for (int g = 1; g <= n; ++g) t += ws.phi[g] * ws.rho[n - g];
    ws.rho[n] = t;
  }
  for (int r = 1; r <= R; ++r) {
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    acc.g[r] += sign * weight * (-ws.a[r]);
  }
  // T[n] = sum_{s + j = n} rho_j l_s, the left factor of the projector terms.
  ws.T.resize(static_cast<std::size_t>(R) + 1);
  for (int n = 0; n <= R; ++n) {
    auto& T = ws.T[static_cast<std::size_t>(n)];
    T.setZero(s.v0.size());
    for (int sidx = 0; sidx <= std::min(n, J); ++sidx) T += ws.rho[n - sidx] * ws.l[static_cast<std::size_t>(sidx)];
  }
  for (int r = 1; r <= R; ++r) {
    const double sign = (r % 2 == 0) ? -1.0 : 1.0;
    acc.col[r] += (sign * weight * inv) * ws.T[static_cast<std::size_t>(r)];
  }
  if (full) {
    const int Jbar = chain(s, std::conj(z), R, ws.lbar, ws.cbar, ws.wl);
    for (int r = 1; r <= R; ++r) {
      const double sign = (r % 2 == 0) ? -1.0 : 1.0;
      const cplx f = sign * weight * inv;
      for (int t = 0; t <= std::min(r, Jbar); ++t)
        acc.full[r].noalias() += f * ws.T[static_cast<std::size_t>(r - t)] * ws.lbar[static_cast<std::size_t>(t)].adjoint();
    }
  }
}

void run_nodes(const LevelState& s, int first, int step, int total, int R, bool full, Accum& acc) {
  const double rho = s.contour.radius;
  Workspace ws;
  for (int j = first; j < total; j += step) {
    const double theta = 2.0 * kPi * j / total;
    const cplx e = std::polar(1.0, theta);
    add_node(s, s.contour.center + rho * e, rho * e, R, full, acc, ws);
  }
}

int find_zero(const std::vector<LatticeIndex>& indices) {
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i].is_zero()) return static_cast<int>(i);
  throw ConfigError("index box does not contain m = 0");
}

}  // namespace

LevelState level1_state(const Vec2& kappa, const PotentialSpec& spec, const QPParams& params, const Profile& profile,
                        std::optional<double> radius) {
  LevelState s;
  s.level = 1;
  s.kappa = kappa;
  s.spec = &spec;
  s.params = &params;
  s.indices = box_cached(profile.R);
  const auto n = s.indices.size();
  const Eigen::VectorXd d = free_diagonal(kappa, s.indices, params);
  s.zero_pos = find_zero(s.indices);
  s.target_pos = s.zero_pos;
  for (std::size_t i = 0; i < n; ++i) {
    s.single_pos.push_back(static_cast<int>(i));
    s.single_val.push_back(d(static_cast<Eigen::Index>(i)));
  }
  s.model_eigenvalues = s.single_val;
  s.e0 = d(s.zero_pos);
  s.v0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  s.v0(s.zero_pos) = 1.0;
  s.W = coupling(s.indices, std::vector<int>(n, -1), spec);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& m : box_cached(profile.R_tilde)) {
    if (m.is_zero()) continue;
    gap = std::min(gap, std::abs((kappa + dual_vector(m, params).p).squaredNorm() - s.e0));
  }
  s.contour = {s.e0, radius.value_or(0.5 * gap), 0};
  return s;
}

LevelState step_state(int level, const Vec2& kappa, int box_radius, const std::vector<std::vector<LatticeIndex>>& blocks,
                      const PotentialSpec& spec, const QPParams& params, std::optional<double> radius) {
  LevelState s;
  s.level = level;
  s.kappa = kappa;
  s.spec = &spec;
  s.params = &params;
  s.indices = box_cached(box_radius);
  const IndexMap pos(s.indices);
  const auto n = s.indices.size();
  s.zero_pos = find_zero(s.indices);
  std::vector<int> block_of(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (const auto& m : blocks[b]) {
      const int p = pos.find(m);
      if (p < 0) continue;
      if (block_of[static_cast<std::size_t>(p)] >= 0) throw OverlapDetected("index " + to_string(m) + " in two blocks");
      block_of[static_cast<std::size_t>(p)] = static_cast<int>(b);
    }
  if (block_of[static_cast<std::size_t>(s.zero_pos)] != 0) throw ConfigError("the first block must contain m = 0");

  const Eigen::VectorXd d = free_diagonal(kappa, s.indices, params);
  for (std::size_t i = 0; i < n; ++i)
    if (block_of[i] < 0) {
      s.single_pos.push_back(static_cast<int>(i));
      s.single_val.push_back(d(static_cast<Eigen::Index>(i)));
      s.model_eigenvalues.push_back(d(static_cast<Eigen::Index>(i)));
    }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    ModelBlock mb;
    std::vector<LatticeIndex> members;
    for (std::size_t i = 0; i < n; ++i)
      if (block_of[i] == static_cast<int>(b)) {
        mb.positions.push_back(static_cast<int>(i));
        members.push_back(s.indices[i]);
      }
    if (mb.positions.empty()) continue;
    const FiberMatrix F = assemble(kappa, members, spec, params);
    const auto sd = eig_hermitian(F.H, true);
    mb.evals = sd.eigenvalues;
    mb.evecs = sd.eigenvectors;
    for (Eigen::Index i = 0; i < mb.evals.size(); ++i) s.model_eigenvalues.push_back(mb.evals(i));
    s.blocks.push_back(std::move(mb));
  }
  // Target: the core eigenvector with the largest weight at m = 0.
  s.target_block = 0;
  const auto& core = s.blocks[0];
  const auto zero_in_core = static_cast<Eigen::Index>(
      std::find(core.positions.begin(), core.positions.end(), s.zero_pos) - core.positions.begin());
  core.evecs.row(zero_in_core).cwiseAbs().maxCoeff(&s.target_eig);
  s.e0 = core.evals(s.target_eig);
  s.v0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < core.positions.size(); ++i)
    s.v0(core.positions[i]) = core.evecs(static_cast<Eigen::Index>(i), s.target_eig);
  s.W = coupling(s.indices, block_of, spec);

  double gap = std::numeric_limits<double>::infinity();
  bool skipped = false;
  for (double e : s.model_eigenvalues) {
    if (!skipped && e == s.e0) {
      skipped = true;
      continue;
    }
    gap = std::min(gap, std::abs(e - s.e0));
  }
  s.contour = {s.e0, radius.value_or(0.5 * gap), 0};
  return s;
}

LevelState level2_state(const Vec2& kappa, const BlockProjector& P, const PotentialSpec& spec, const QPParams& params,
                        const Profile& profile, std::optional<double> radius) {
  std::vector<std::vector<LatticeIndex>> blocks;
  for (const auto& b : P.blocks) blocks.push_back(b.indices);
  return step_state(2, kappa, profile.R2, blocks, spec, params, radius);
}

Eigen::MatrixXcd full_operator(const LevelState& state) {
  return assemble(state.kappa, state.indices, *state.spec, *state.params).H;
}

void attach_oracle(SeriesResult& res, const LevelState& state) {
  const auto sd = eig_hermitian(full_operator(state), false);
  const double c = state.contour.center, rho = state.contour.radius;
  res.oracle_count = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    const double e = sd.eigenvalues(i);
    if (std::abs(e - c) < rho) ++res.oracle_count;
    if (std::abs(e - res.lambda) < best) {
      best = std::abs(e - res.lambda);
      res.oracle_lambda = e;
    }
  }
}

SeriesResult generic_step(const LevelState& s, const Profile& profile, const SeriesOptions& opts) {
  check_contour(s, profile);
  const int R = std::max(2, profile.r_max);
  const auto n = s.v0.size();
  auto fresh = [&] {
    Accum a;
    a.g.assign(R + 1, 0.0);
    a.col.assign(R + 1, Eigen::VectorXcd::Zero(n));
    if (opts.full_projector) a.full.assign(R + 1, Eigen::MatrixXcd::Zero(n, n));
    return a;
  };
  Accum acc = fresh();
  int N = std::max(4, profile.quad_min_nodes);
  run_nodes(s, 0, 1, N, R, opts.full_projector, acc);
  const double scale = std::abs(s.contour.center);
  // Later passes only refine orders that are visible above rounding after the first pass.
  int Rw = R;
  for (int r = 2; r <= R; ++r)
    if (std::max(std::abs(acc.g[r]), std::abs(acc.g[r - 1])) <= 1e-17 * scale * N) {
      Rw = std::min(R, r + 2);
      break;
    }
  bool quad_ok = false;
  while (2 * N <= std::max(profile.quad_max_nodes, 2 * profile.quad_min_nodes)) {
    Accum odd = fresh();
    run_nodes(s, 1, 2, 2 * N, Rw, opts.full_projector, odd);
    double worst = 0.0;
    for (int r = 1; r <= Rw; ++r) {
      const cplx prev = acc.g[r] / static_cast<double>(N);
      const cplx next = (acc.g[r] + odd.g[r]) / static_cast<double>(2 * N);
      const double allowed = std::max(profile.quad_tol * std::abs(next), 1e-15 * scale);
      worst = std::max(worst, std::abs(next - prev) / allowed);
    }
    for (int r = 1; r <= Rw; ++r) {
      acc.g[r] += odd.g[r];
      acc.col[r] += odd.col[r];
      if (opts.full_projector) acc.full[r] += odd.full[r];
    }
    N *= 2;
    if (worst <= 1.0 && N >= 64) {
      quad_ok = true;
      break;
    }
  }
  if (!quad_ok) {
    std::ostringstream os;
    os << "contour quadrature did not settle with " << N << " nodes";
    throw NonConvergent(os.str());
  }
  for (int r = Rw + 1; r <= R; ++r) {
    acc.g[r] = 0.0;
    acc.col[r].setZero();
    if (opts.full_projector) acc.full[r].setZero();
  }

  SeriesResult res;
  res.level = s.level;
  res.center = s.contour.center;
  res.radius = s.contour.radius;
  res.nodes = N;
  std::vector<cplx> g(R + 1, 0.0);
  for (int r = 1; r <= R; ++r) g[r] = acc.g[r] / static_cast<double>(N);

  // Orders are summed until the two-term envelope drops below rounding level.
  auto env = [&](int r) { return std::max(std::abs(g[r]), std::abs(g[r - 1])); };
  int used = R;
  int run = 0;
  bool stopped = false;
  for (int r = 2; r <= R; ++r) {
    if (env(r) <= 1e-15 * scale) {
      used = r;
      stopped = true;
      break;
    }
    if (r >= 3) {
      const double ratio = env(r - 1) > 0 ? env(r) / env(r - 1) : 0.0;
      run = ratio >= profile.nonconv_ratio ? run + 1 : 0;
      if (run >= profile.nonconv_run) {
        std::ostringstream os;
        os << "series coefficients stopped decaying at order " << r << " (ratio " << ratio << ")";
        throw NonConvergent(os.str());
      }
    }
  }
  double q = 0.0;
  if (used >= 4 && env(used - 2) > 0) q = std::sqrt(env(used) / env(used - 2));
  if (!stopped && q >= 1.0) throw NonConvergent("series envelope is not decaying at the last order");
  res.ratio = q;
  res.orders = used;
  res.tail = stopped ? 1e-15 * scale : env(used) / (1.0 - q);
  res.converged = stopped || q < profile.nonconv_ratio;

  res.g.assign(used + 1, 0.0);
  res.g_imag.assign(used + 1, 0.0);
  res.lambda = s.e0;
  for (int r = 1; r <= used; ++r) {
    res.g[r] = g[r].real();
    res.g_imag[r] = g[r].imag();
    res.lambda += g[r].real();
  }

  Eigen::VectorXcd ev = s.v0;
  for (int r = 1; r <= used; ++r) {
    const Eigen::VectorXcd Gr = acc.col[r] / static_cast<double>(N);
    ev += Gr;
    if (!opts.full_projector) res.G_norms.push_back(Gr.norm());
  }
  const cplx ph = ev(s.zero_pos);
  ev *= std::abs(ph) > 0 ? std::conj(ph) / std::abs(ph) : 1.0;
  res.v = ev / ev.norm();

  if (opts.full_projector) {
    res.E = s.v0 * s.v0.adjoint();
    res.G.assign(used + 1, Eigen::MatrixXcd::Zero(n, n));
    for (int r = 1; r <= used; ++r) {
      res.G[r] = acc.full[r] / static_cast<double>(N);
      res.E += res.G[r];
      res.G_norms.push_back(res.G[r].norm());
    }
  }

  if (opts.check_oracle) {
    attach_oracle(res, s);
    if (res.oracle_count != 1) {
      std::ostringstream os;
      os << "oracle finds " << res.oracle_count << " eigenvalues inside the contour";
      throw NotUnique(os.str());
    }
  }
  return res;
}

SeriesResult eigenvalue_level(int level, const Vec2& kappa, const LevelInputs& in, const SeriesOptions& opts) {
  if (!in.spec || !in.params || !in.profile) throw ConfigError("level inputs are incomplete");
  if (level == 1) {
    const auto s = level1_state(kappa, *in.spec, *in.params, *in.profile, opts.radius);
    return generic_step(s, *in.profile, opts);
  }
  if (level == 2) {
    if (!in.P) throw ConfigError("level two needs a block projector");
    const auto s = level2_state(kappa, *in.P, *in.spec, *in.params, *in.profile, opts.radius);
    return generic_step(s, *in.profile, opts);
  }
  throw ConfigError("only levels 1 and 2 are available through eigenvalue_level");
}

SeriesResult projector_level(int level, const Vec2& kappa, const LevelInputs& in) {
  SeriesOptions o;
  o.full_projector = level == 1;
  return eigenvalue_level(level, kappa, in, o);
}

Derivatives derivative_probe(int level, double kappa, double phi, double h, const LevelInputs& in) {
  auto lam = [&](double kap, double ph) {
    return eigenvalue_level(level, Vec2(kap * std::cos(ph), kap * std::sin(ph)), in).lambda;
  };
  Derivatives d;
  d.d_kappa = (lam(kappa + h, phi) - lam(kappa - h, phi)) / (2.0 * h);
  d.d_phi = (lam(kappa, phi + h) - lam(kappa, phi - h)) / (2.0 * h);
  return d;
}

double second_order_closed_form(const Vec2& kappa, const PotentialSpec& spec, const QPParams& params, int radius) {
  const double e0 = kappa.squaredNorm();
  double sum = 0.0;
  for (const auto& [q, v] : spec.nonzero()) {
    if (q.is_zero() || triple_norm(q) > radius) continue;
    sum += std::norm(v) / (e0 - (kappa + dual_vector(q, params).p).squaredNorm());
  }
  return sum;
}

double second_order_closed_form_dkappa(double kappa, double phi, const PotentialSpec& spec, const QPParams& params,
                                       int radius) {
  const Vec2 nu(std::cos(phi), std::sin(phi));
  double sum = 0.0;
  for (const auto& [q, v] : spec.nonzero()) {
    if (q.is_zero() || triple_norm(q) > radius) continue;
    const Vec2 p = dual_vector(q, params).p;
    const double D = -2.0 * kappa * p.dot(nu) - p.squaredNorm();
    sum += 2.0 * std::norm(v) * p.dot(nu) / (D * D);
  }
  return sum;
}

}  // namespace qp
