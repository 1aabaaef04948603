#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qp/angles.hpp"
#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"

namespace qp {

// |k nu(phi) + p|^2 - k^2
double resonance_value(double phi, double k, const Vec2& p);
bool resonant_at(double phi, double k, const LatticeIndex& m, const QPParams& params, double threshold);
bool step1_resonant(double phi, double k, const LatticeIndex& m, const QPParams& params, const Profile& profile);

// The exact set of phi with |resonance_value| <= threshold.
AngleSet resonance_arcs(double k, const Vec2& p, double threshold);

// Zeros of p^2 + 2 k p cos(phi - theta); absent when p > 2k.
struct CrossingAngles {
  bool real = false;
  double plus = 0.0, minus = 0.0;
};
CrossingAngles crossing_angles(double k, const Vec2& p);

// Covering discs for a resonance set: empty when p is far beyond 2k, a pair of discs
// around the crossing angles, or one disc around theta + pi when p exceeds 2k.
struct ResonanceDiscs {
  enum class Kind { Empty, Transversal, Tangential, Unbounded };
  Kind kind = Kind::Empty;
  double radius = 0.0;
  std::vector<double> centers;
  bool covers(double phi) const;
};
ResonanceDiscs resonance_discs(double k, const Vec2& p, double threshold, double tau);

struct Omega1 {
  double k = 0.0;
  AngleSet omega;
  AngleSet excluded;
};
Omega1 build_omega1(double k, const QPParams& params, const Profile& profile);
bool in_O1(double phi, double k, const QPParams& params, const Profile& profile);

enum class Strength { Unknown, Weak, Strong };
const char* to_string(Strength s);

struct ChainSubset {
  LatticeIndex central;
  int n_minus = 0, n_plus = 0;
  std::vector<LatticeIndex> points;
  double t_q = 0.0;
  Strength strength = Strength::Unknown;
  int poles = 0;
};

struct ChainClass {
  std::vector<LatticeIndex> members;
  bool colinear = true;
  bool has_direction = false;
  LatticeIndex direction;
  double p_q = 0.0;
  double t_perp = 0.0;
  bool trivial = true;
  std::vector<ChainSubset> subsets;
};

struct ClusterDecomposition {
  double phi0 = 0.0;
  double k = 0.0;
  int radius = 0;
  std::vector<LatticeIndex> M, Mprime, M1;
  std::vector<ChainClass> classes;
  int non_colinear_classes = 0;
  bool strength_done = false;
};

ClusterDecomposition classify(double phi0, double k, int radius, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile);

struct Pole {
  double phi = 0.0;
  int multiplicity = 1;
};
using KappaOfPhi = std::function<double(double phi)>;

// Angles in window where the block matrix at kappa(phi) nu(phi) has eigenvalue k^2.
std::vector<Pole> block_poles(const std::vector<LatticeIndex>& block, double k, Interval window,
                              const PotentialSpec& spec, const QPParams& params, const Profile& profile,
                              const KappaOfPhi& kappa_of_phi = {});
int pole_count(const std::vector<Pole>& poles);

void strength(ClusterDecomposition& decomp, const PotentialSpec& spec, const QPParams& params, const Profile& profile);

enum class BlockKind { Core, M1Box, TrivialStrong, NontrivialWeak, NontrivialStrong, Merged };
const char* to_string(BlockKind k);

struct Block {
  BlockKind kind = BlockKind::Core;
  std::vector<LatticeIndex> indices;
  int n_subsets = 0;  // chain subsets forming a strong cluster
};

struct BlockProjector {
  std::vector<Block> blocks;  // blocks[0] is the core
  int merges = 0;
  int box_radius = 0;
};

BlockProjector assemble_projector(const ClusterDecomposition& decomp, const PotentialSpec& spec,
                                  const QPParams& params, const Profile& profile, int box_radius);

// Count of nonzero V entries between distinct blocks, and between the core and other blocks.
struct OrthogonalityReport {
  std::size_t cross_entries = 0;
  std::size_t core_entries = 0;
  std::size_t overlaps = 0;
};
OrthogonalityReport check_orthogonality(const BlockProjector& P, const PotentialSpec& spec);

int appendix4_count(const LatticeIndex& m, double k, double eps0, const PotentialSpec& spec, const QPParams& params,
                    const Profile& profile, int grid = 720, std::vector<double>* roots = nullptr);

}  // namespace qp
