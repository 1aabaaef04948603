#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"
#include "qp/resonance.hpp"

namespace qp {

struct Contour {
  double center = 0.0;
  double radius = 0.0;
  int nodes = 0;
};

// One diagonal block of the model operator, eigendecomposed once per point.
struct ModelBlock {
  std::vector<int> positions;
  Eigen::VectorXd evals;
  Eigen::MatrixXcd evecs;
};

// Model operator (block diagonal) plus perturbation W on one index box.
struct LevelState {
  int level = 1;
  Vec2 kappa{0.0, 0.0};
  std::vector<LatticeIndex> indices;
  std::vector<int> single_pos;  // 1x1 blocks
  std::vector<double> single_val;
  std::vector<ModelBlock> blocks;
  int target_block = -1;  // -1: the target is the 1x1 block at target_pos
  int target_eig = 0;
  int target_pos = 0;
  double e0 = 0.0;
  Eigen::VectorXcd v0;
  int zero_pos = 0;  // position of m = 0
  Eigen::SparseMatrix<cplx> W;
  const PotentialSpec* spec = nullptr;
  const QPParams* params = nullptr;
  Contour contour;
  std::vector<double> model_eigenvalues;
};

struct SeriesResult {
  int level = 1;
  double center = 0.0;
  double lambda = 0.0;
  std::vector<double> g;        // g[r] for r = 0..R; g[0] = 0
  std::vector<double> g_imag;   // imaginary parts, zero up to rounding
  double tail = 0.0;
  double ratio = 0.0;
  bool converged = false;
  int orders = 0;
  int nodes = 0;
  double radius = 0.0;
  Eigen::VectorXcd v;             // unit vector along E v0, phase fixed so v at m=0 is positive
  Eigen::MatrixXcd E;             // full projector, filled on request
  std::vector<Eigen::MatrixXcd> G;  // G[r], filled on request
  std::vector<double> G_norms;
  std::optional<double> oracle_lambda;
  int oracle_count = -1;
};

struct SeriesOptions {
  bool full_projector = false;
  bool check_oracle = false;
  std::optional<double> radius;  // overrides the default contour radius
};

LevelState level1_state(const Vec2& kappa, const PotentialSpec& spec, const QPParams& params, const Profile& profile,
                        std::optional<double> radius = {});
LevelState level2_state(const Vec2& kappa, const BlockProjector& P, const PotentialSpec& spec, const QPParams& params,
                        const Profile& profile, std::optional<double> radius = {});
// Model from an arbitrary block list on a box: blocks[0] holds the target, the rest of the box is diagonal.
LevelState step_state(int level, const Vec2& kappa, int box_radius, const std::vector<std::vector<LatticeIndex>>& blocks,
                      const PotentialSpec& spec, const QPParams& params, std::optional<double> radius = {});

SeriesResult generic_step(const LevelState& state, const Profile& profile, const SeriesOptions& opts = {});

// The full truncated operator on the state's box, for oracle comparisons.
Eigen::MatrixXcd full_operator(const LevelState& state);
void attach_oracle(SeriesResult& res, const LevelState& state);

struct LevelInputs {
  const PotentialSpec* spec = nullptr;
  const QPParams* params = nullptr;
  const Profile* profile = nullptr;
  const BlockProjector* P = nullptr;  // level 2
};

SeriesResult eigenvalue_level(int level, const Vec2& kappa, const LevelInputs& in, const SeriesOptions& opts = {});
SeriesResult projector_level(int level, const Vec2& kappa, const LevelInputs& in);

struct Derivatives {
  double d_kappa = 0.0;
  double d_phi = 0.0;
};
Derivatives derivative_probe(int level, double kappa, double phi, double h, const LevelInputs& in);

// Second-order coefficient by direct summation over the level-one box.
double second_order_closed_form(const Vec2& kappa, const PotentialSpec& spec, const QPParams& params, int radius);
double second_order_closed_form_dkappa(double kappa, double phi, const PotentialSpec& spec, const QPParams& params,
                                       int radius);

}  // namespace qp
