#pragma once

#include <map>
#include <string>
#include <vector>

#include "qp/lattice.hpp"
#include "qp/perturb.hpp"
#include "qp/potential.hpp"

namespace qp {

// Finite exponential sum sum_s v_s exp(i <kappa + p_s, x>).
struct WaveFunction {
  int level = 1;
  Vec2 kappa{0.0, 0.0};
  double lambda = 0.0;
  int support_radius = 0;
  std::map<LatticeIndex, cplx> coeffs;  // unit l2 norm, coefficient at m = 0 real positive
};

WaveFunction synthesize(int level, const Vec2& kappa, const LevelInputs& in);
// The plane wave exp(i <kappa, x>).
WaveFunction plane_wave(const Vec2& kappa);

struct Residual {
  std::map<LatticeIndex, cplx> g;  // (H - lambda) v on the enlarged box
  double l1 = 0.0;
  double l2 = 0.0;
  double interior_max = 0.0;  // largest |g_s| with triple_norm(s) <= support radius
  double outside_max = 0.0;   // largest |g_s| beyond the shell, zero by construction
  double shell_max = 0.0;
};
Residual residual(const WaveFunction& wf, const PotentialSpec& spec, const QPParams& params);

double coefficient_l1_distance(const WaveFunction& a, const WaveFunction& b);

cplx evaluate(const WaveFunction& wf, const Vec2& x, const QPParams& params);

struct GridSample {
  int n = 0;
  std::vector<Vec2> x;
  std::vector<cplx> psi;
  std::vector<double> u_abs;  // |exp(-i <kappa, x>) (psi - psi_prev)|
  double sup_psi = 0.0;
  double sup_u = 0.0;
};
// n x n grid over [0, 1)^2; prev is the previous level (the plane wave at level one).
GridSample sample(const WaveFunction& wf, const WaveFunction& prev, const QPParams& params, int n = 64);
double grid_sup_difference(const WaveFunction& a, const WaveFunction& b, const QPParams& params, int n = 64);

void export_sample_csv(const GridSample& s, const std::string& path);

}  // namespace qp
