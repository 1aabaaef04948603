#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qp/lattice.hpp"
#include "qp/potential.hpp"

namespace qp {

// Position lookup for an ordered index list.
class IndexMap {
 public:
  IndexMap() = default;
  explicit IndexMap(const std::vector<LatticeIndex>& indices);  // throws DuplicateIndex
  int find(const LatticeIndex& m) const {
    auto it = map_.find(m);
    return it == map_.end() ? -1 : it->second;
  }
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<LatticeIndex, int, LatticeIndexHash> map_;
};

struct FiberMatrix {
  std::vector<LatticeIndex> indices;
  Vec2 kappa{0.0, 0.0};
  Eigen::MatrixXcd H;
  double norm_bound = 0.0;  // max diagonal + sum |V_q|
};

FiberMatrix assemble(const Vec2& kappa, const std::vector<LatticeIndex>& indices, const PotentialSpec& spec,
                     const QPParams& params);
// The free part |kappa + p_m|^2 only.
Eigen::VectorXd free_diagonal(const Vec2& kappa, const std::vector<LatticeIndex>& indices, const QPParams& params);

struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  double residual_norm = 0.0;
};

inline constexpr std::size_t kDefaultDimensionCap = 4096;

SpectralData eig_oracle(const FiberMatrix& M, bool vectors = true, std::size_t cap = kDefaultDimensionCap);
SpectralData eig_hermitian(const Eigen::MatrixXcd& H, bool vectors = true, std::size_t cap = kDefaultDimensionCap);
double resolvent_gap(const FiberMatrix& M, std::complex<double> z);

struct WindowResult {
  std::size_t count = 0;
  std::vector<double> eigenvalues;
};
WindowResult spectral_window(const FiberMatrix& M, double center, double radius);
WindowResult spectral_window(const Eigen::VectorXd& sorted_eigenvalues, double center, double radius);

}  // namespace qp
