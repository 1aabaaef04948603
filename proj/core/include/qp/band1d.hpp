#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"
#include "qp/resonance.hpp"

namespace qp {

// Finite sections of the one-dimensional periodic operator along a direction q of S_Q.
struct PeriodicBand {
  LatticeIndex direction;
  double p_q = 0.0;
  int N = 0;
  std::map<std::pair<int, double>, double> bands;  // (n, t) -> n-th eigenvalue at t
  std::vector<double> zone_lengths;                // max_t - min_t per band
};

// (t + n1 p_q)^2 on the diagonal and V_{(n1 - n2) q} off it, for n1, n2 in [-N, N].
Eigen::MatrixXcd assemble_periodic(const LatticeIndex& q, double t, int N, const PotentialSpec& spec,
                                   const QPParams& params);
// Same entries on an arbitrary window [n_lo, n_hi].
Eigen::MatrixXcd assemble_window(const LatticeIndex& q, double t, int n_lo, int n_hi, const PotentialSpec& spec,
                                 const QPParams& params);

PeriodicBand band_function(const LatticeIndex& q, int n_bands, const std::vector<double>& t_grid, int N,
                           const PotentialSpec& spec, const QPParams& params);

int reference_truncation(int window);

// Largest distance from the lowest n_low eigenvalues of the window section to the reference spectrum.
double finite_vs_periodic(const LatticeIndex& q, double t, int n_lo, int n_hi, const PotentialSpec& spec,
                          const QPParams& params, int n_low = 3);
double finite_vs_periodic(const ChainSubset& subset, const ChainClass& cls, const PotentialSpec& spec,
                          const QPParams& params, int n_low = 3);

// Max entry of H(kappa) on the chain minus (1D operator at t_q plus t_perp^2 I).
double separation_check(const ChainSubset& subset, const LatticeIndex& direction, const Vec2& kappa,
                        const PotentialSpec& spec, const QPParams& params);

void export_band_csv(const PeriodicBand& band, const std::string& path);

}  // namespace qp
