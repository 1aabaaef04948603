#include "qp/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qp/errors.hpp"

namespace qp {

IndexMap::IndexMap(const std::vector<LatticeIndex>& indices) {
  map_.reserve(indices.size() * 2);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (!map_.emplace(indices[i], static_cast<int>(i)).second)
      throw DuplicateIndex("index " + to_string(indices[i]) + " appears twice");
  }
}

Eigen::VectorXd free_diagonal(const Vec2& kappa, const std::vector<LatticeIndex>& indices, const QPParams& params) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i)
    d(static_cast<Eigen::Index>(i)) = (kappa + dual_vector(indices[i], params).p).squaredNorm();
  return d;
}

FiberMatrix assemble(const Vec2& kappa, const std::vector<LatticeIndex>& indices, const PotentialSpec& spec,
                     const QPParams& params) {
  const IndexMap pos(indices);
  FiberMatrix M;
  M.indices = indices;
  M.kappa = kappa;
  const auto n = static_cast<Eigen::Index>(indices.size());
  M.H = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::VectorXd diag = free_diagonal(kappa, indices, params);
  for (Eigen::Index i = 0; i < n; ++i) M.H(i, i) = diag(i);
  // Place V_q at (m, m - q) and its conjugate at the mirrored slot in one step.
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = indices[static_cast<std::size_t>(i)];
    for (const auto& [q, v] : spec.nonzero()) {
      if (!(LatticeIndex{} < q)) continue;
      const int j = pos.find(m - q);
      if (j < 0) continue;
      M.H(i, j) = v;
      M.H(j, i) = std::conj(v);
    }
  }
  M.norm_bound = (n > 0 ? diag.cwiseAbs().maxCoeff() : 0.0) + spec.l1_norm();
  return M;
}

SpectralData eig_hermitian(const Eigen::MatrixXcd& H, bool vectors, std::size_t cap) {
  if (static_cast<std::size_t>(H.rows()) > cap) {
    std::ostringstream os;
    os << "dimension " << H.rows() << " exceeds cap " << cap;
    throw DimensionCap(os.str());
  }
  SpectralData out;
  if (H.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, vectors ? Eigen::ComputeEigenvectors
                                                                 : Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  if (vectors) {
    out.eigenvectors = es.eigenvectors();
    const Eigen::MatrixXcd R = H * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
    out.residual_norm = R.colwise().norm().maxCoeff();
  }
  return out;
}

SpectralData eig_oracle(const FiberMatrix& M, bool vectors, std::size_t cap) {
  return eig_hermitian(M.H, vectors, cap);
}

double resolvent_gap(const FiberMatrix& M, std::complex<double> z) {
  const auto sd = eig_oracle(M, false);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i)
    best = std::min(best, std::abs(z - sd.eigenvalues(i)));
  return best;
}

WindowResult spectral_window(const Eigen::VectorXd& ev, double center, double radius) {
  WindowResult w;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - center) <= radius) w.eigenvalues.push_back(ev(i));
  w.count = w.eigenvalues.size();
  return w;
}

WindowResult spectral_window(const FiberMatrix& M, double center, double radius) {
  return spectral_window(eig_oracle(M, false).eigenvalues, center, radius);
}

}  // namespace qp
