#pragma once

#include <string>
#include <vector>

#include "qp/angles.hpp"
#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"
#include "qp/resonance.hpp"

namespace qp {

// Pole counts of every non-core block around one base angle.
struct BlockPoleCount {
  BlockKind kind = BlockKind::Core;
  std::size_t size = 0;
  int poles = 0;
  int cap = 0;
  std::vector<double> pole_phi;
};

struct WindowPoles {
  double phi0 = 0.0;
  double kappa1 = 0.0;
  std::vector<BlockPoleCount> m1_boxes;   // window 2 * interval_width at kappa1(phi)
  std::vector<BlockPoleCount> subsets;    // chain subsets, window W at k
  std::vector<BlockPoleCount> strong_clusters;  // poles replaced by the number of subsets
  std::vector<BlockPoleCount> blocks;     // projector blocks over the interval, at kappa1(phi)
  int violations = 0;
};

// kappa1 is the level-one radius at (k^2, phi0); kappa1_of_phi interpolates it across the window.
WindowPoles window_poles(double phi0, double k, const KappaOfPhi& kappa1_of_phi, const PotentialSpec& spec,
                         const QPParams& params, const Profile& profile);
// Quadratic interpolation of the level-one radius through three solves on [lo, hi].
KappaOfPhi kappa1_interpolant(double k, double lo, double hi, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile);

struct SecondResonantSet {
  AngleSet O2;
  AngleSet omega2;
  AngleSet covered;  // union of the examined intervals
  std::vector<WindowPoles> windows;
  int skipped = 0;   // windows whose base angle is not admissible
};

SecondResonantSet second_resonant_set(double k, const std::vector<double>& phi0_grid, const PotentialSpec& spec,
                                      const QPParams& params, const Profile& profile);

struct M2Set {
  std::vector<LatticeIndex> points;
  std::vector<std::vector<LatticeIndex>> blocks;  // resonant components with a pole near phi0
  std::vector<LatticeIndex> nonresonant;          // points of M outside the blocks and outside the core
  int core_violations = 0;                        // points found inside the level-two box
};

M2Set build_M2set(double phi0, double k, double kappa1, const PotentialSpec& spec, const QPParams& params,
                  const Profile& profile);

// Ordered from lightest to darkest.
enum class Color { NonResonant, White, Grey, Black, Simple };
const char* to_string(Color c);

struct RegionComponent {
  Color color = Color::NonResonant;
  std::vector<LatticeIndex> indices;   // sorted
  std::vector<LatticeIndex> boundary;  // indices coupled by V to the complement
  int n_resonant_points = 0;
};

struct RegionMap {
  std::vector<RegionComponent> components;
  double k = 0.0;
  int core_radius = 0;
  int merges = 0;  // cross-color merges forced by V coupling
  int passes = 0;
};

// Same-color separation required after merging.
int separation_threshold(Color c, const Profile& profile);

RegionMap region_map(const M2Set& m2, double k, const QPParams& params, const PotentialSpec& spec,
                     const Profile& profile);
// Applies the merge rules to an existing map; a fixpoint for region_map output.
RegionMap merge_components(const RegionMap& map, const PotentialSpec& spec, const Profile& profile);
bool same_map(const RegionMap& a, const RegionMap& b);

struct SeparationReport {
  int pairs_checked = 0;
  int violations = 0;
  int min_margin = 0;  // smallest (distance - threshold) over same-color pairs
};
SeparationReport check_separations(const RegionMap& map, const Profile& profile);

struct BoundaryReport {
  double max_cross = 0.0;     // |V| between distinct components
  double max_boundary = 0.0;  // |V| from a non-boundary index to the complement
  std::size_t checked = 0;
};
BoundaryReport boundary_check(const RegionMap& map, const PotentialSpec& spec);

struct RegionStats {
  std::vector<int> sizes;
  std::vector<int> points;
  double max_ratio = 0.0;
  std::vector<double> ratios;
  std::size_t black = 0, grey = 0, white = 0, simple = 0, nonresonant = 0;
};
// Counting ratios: resonant points within counting_radius of each center over k^{2 gamma' r1 / 3 + 1}.
RegionStats region_stats(const RegionMap& map, const M2Set& m2, const std::vector<LatticeIndex>& centers,
                         const Profile& profile);

std::string regions_json(const RegionMap& map, const RegionStats& stats, const SeparationReport& sep,
                         const BoundaryReport& bnd);

}  // namespace qp
