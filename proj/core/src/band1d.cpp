#include "qp/band1d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "qp/errors.hpp"
#include "qp/fiber.hpp"

namespace qp {

namespace {

void require_generator(const LatticeIndex& q, const PotentialSpec& spec) {
  if (q.is_zero() || !(primitive_direction(q) == q)) throw NotGenerator(to_string(q) + " is not a primitive direction");
  for (const auto& [m, v] : spec.nonzero())
    if (integer_parallel(m, q)) return;
  throw NotGenerator("no nonzero coefficient of the potential lies along " + to_string(q));
}

}  // namespace

Eigen::MatrixXcd assemble_window(const LatticeIndex& q, double t, int n_lo, int n_hi, const PotentialSpec& spec,
                                 const QPParams& params) {
  require_generator(q, spec);
  const double p = dual_vector(q, params).length();
  const int w = n_hi - n_lo + 1;
  if (w < 1) throw ConfigError("empty window");
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(w, w);
  for (int i = 0; i < w; ++i) {
    const double x = t + (n_lo + i) * p;
    H(i, i) = x * x;
    for (int j = 0; j < w; ++j)
      if (i != j) H(i, j) = coefficient(spec, (i - j) * q);
  }
  return H;
}

Eigen::MatrixXcd assemble_periodic(const LatticeIndex& q, double t, int N, const PotentialSpec& spec,
                                   const QPParams& params) {
  if (N < 1) throw ConfigError("truncation must be at least 1");
  return assemble_window(q, t, -N, N, spec, params);
}

PeriodicBand band_function(const LatticeIndex& q, int n_bands, const std::vector<double>& t_grid, int N,
                           const PotentialSpec& spec, const QPParams& params) {
  PeriodicBand b;
  b.direction = q;
  b.p_q = dual_vector(q, params).length();
  b.N = N;
  const int nb = std::min(n_bands, 2 * N + 1);
  std::vector<double> lo(nb, std::numeric_limits<double>::infinity()), hi(nb, -lo[0]);
  for (double t : t_grid) {
    const auto ev = eig_hermitian(assemble_periodic(q, t, N, spec, params), false).eigenvalues;
    for (int n = 0; n < nb; ++n) {
      b.bands[{n, t}] = ev(n);
      lo[n] = std::min(lo[n], ev(n));
      hi[n] = std::max(hi[n], ev(n));
    }
  }
  for (int n = 0; n < nb && !t_grid.empty(); ++n) b.zone_lengths.push_back(hi[n] - lo[n]);
  return b;
}

int reference_truncation(int window) { return std::max(64, 4 * window); }

double finite_vs_periodic(const LatticeIndex& q, double t, int n_lo, int n_hi, const PotentialSpec& spec,
                          const QPParams& params, int n_low) {
  const int w = n_hi - n_lo + 1;
  const int Nref = reference_truncation(w);
  const int centre = (n_lo + n_hi) / 2;
  const auto fin = eig_hermitian(assemble_window(q, t, n_lo, n_hi, spec, params), false).eigenvalues;
  const auto ref =
      eig_hermitian(assemble_window(q, t, centre - Nref, centre + Nref, spec, params), false).eigenvalues;
  double gap = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n_low, fin.size()); ++i)
    gap = std::max(gap, (ref.array() - fin(i)).abs().minCoeff());
  return gap;
}

double finite_vs_periodic(const ChainSubset& subset, const ChainClass& cls, const PotentialSpec& spec,
                          const QPParams& params, int n_low) {
  return finite_vs_periodic(cls.direction, subset.t_q, subset.n_minus, subset.n_plus, spec, params, n_low);
}

double separation_check(const ChainSubset& subset, const LatticeIndex& direction, const Vec2& kappa,
                        const PotentialSpec& spec, const QPParams& params) {
  const FiberMatrix F = assemble(kappa, subset.points, spec, params);
  const Vec2 pq = dual_vector(direction, params).p;
  const Vec2 nq = pq / pq.norm();
  const Vec2 nperp(-nq.y(), nq.x());
  const Vec2 base = kappa + dual_vector(subset.central, params).p;
  const double t = base.dot(nq), tp = base.dot(nperp);
  // Chain points are central + n q; recover n from the point order.
  std::vector<int> offs;
  for (const auto& m : subset.points) {
    const LatticeIndex d = m - subset.central;
    int n = 0;
    for (int i = 0; i < 4; ++i)
      if (direction.coord(i) != 0) {
        n = d.coord(i) / direction.coord(i);
        break;
      }
    offs.push_back(n);
  }
  const auto w = static_cast<Eigen::Index>(offs.size());
  Eigen::MatrixXcd H1(w, w);
  for (Eigen::Index i = 0; i < w; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      if (i == j) {
        const double x = t + offs[static_cast<std::size_t>(i)] * pq.norm();
        H1(i, i) = x * x + tp * tp;
      } else {
        H1(i, j) = coefficient(spec, (offs[static_cast<std::size_t>(i)] - offs[static_cast<std::size_t>(j)]) * direction);
      }
    }
  return (F.H - H1).cwiseAbs().maxCoeff();
}

void export_band_csv(const PeriodicBand& band, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "t,n,lambda\n" << std::setprecision(17);
  for (const auto& [key, val] : band.bands) out << key.second << ',' << key.first << ',' << val << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace qp
