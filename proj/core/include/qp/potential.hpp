#pragma once

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "qp/lattice.hpp"

namespace qp {

using cplx = std::complex<double>;

// Fourier coefficients V_q on the closed symmetric index set S_Q.
struct PotentialSpec {
  int Q = 1;
  std::map<LatticeIndex, cplx> coeffs;  // every element of S_Q, zero-valued entries included
  std::vector<std::pair<LatticeIndex, cplx>> generators;

  // Entries with V_q != 0, ordered.
  const std::vector<std::pair<LatticeIndex, cplx>>& nonzero() const { return nonzero_; }
  double l1_norm() const;
  bool in_SQ(const LatticeIndex& q) const { return coeffs.count(q) != 0; }
  bool is_zero() const { return nonzero_.empty(); }
  int max_support_norm() const;

 private:
  std::vector<std::pair<LatticeIndex, cplx>> nonzero_;
  friend PotentialSpec build(const std::vector<std::pair<LatticeIndex, cplx>>&, int, const QPParams&);
};

PotentialSpec build(const std::vector<std::pair<LatticeIndex, cplx>>& generators, int Q, const QPParams& params);
// Rebuild from the full coefficient table; a fixpoint of build.
PotentialSpec rebuild(const PotentialSpec& spec, const QPParams& params);

cplx coefficient(const PotentialSpec& spec, const LatticeIndex& q);
cplx evaluate_complex(const PotentialSpec& spec, const Vec2& x, const QPParams& params);
double evaluate(const PotentialSpec& spec, const Vec2& x, const QPParams& params);

struct DirectionalSublattice {
  LatticeIndex generator;
  double p_q = 0.0;
  std::vector<int> multiples;  // n != 0 with n * generator in S_Q
};

DirectionalSublattice directional_sublattice(const PotentialSpec& spec, const LatticeIndex& q,
                                             const QPParams& params);

}  // namespace qp
