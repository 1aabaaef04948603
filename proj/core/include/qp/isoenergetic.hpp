#pragma once

#include <string>
#include <vector>

#include "qp/angles.hpp"
#include "qp/perturb.hpp"
#include "qp/profile.hpp"
#include "qp/resonance.hpp"

namespace qp {

struct RadiusSolve {
  double kappa = 0.0;
  double residual = 0.0;  // lambda_n(kappa nu) - lambda
  int iterations = 0;
  bool bisected = false;
  double radius = 0.0;    // contour radius of the last evaluation
};

// Root of lambda_n(kappa nu(phi)) = lambda inside [lo, hi] by Newton with slope 2 kappa.
// The bracket is scanned on `scan` subintervals: no sign change gives NoRoot, more than one NotUnique.
RadiusSolve solve_in_bracket(const std::function<double(double)>& lambda_of_kappa, double lambda, double start,
                             double lo, double hi, int scan, const Profile& profile);

RadiusSolve solve_radius(int level, double lambda, double phi, const LevelInputs& in, double start = 0.0);
// Level-one bracket half-width T1 / (32 k).
double level1_bracket(double lambda, const Profile& profile);

struct CurveSample {
  double phi = 0.0;
  double kappa = 0.0;
  double h = 0.0;
  double dkappa_dphi = 0.0;
  bool admissible = false;
  double residual = 0.0;
};

struct IsoCurve {
  int level = 1;
  double lambda = 0.0;
  std::vector<CurveSample> samples;
  std::vector<Interval> holes;
  int structural_failures = 0;  // points dropped for overlap or non-convergence
};

std::vector<double> uniform_phi_grid(int n);

// Level one needs spec, params and profile resolved at sqrt(lambda).
IsoCurve trace_curve1(double lambda, const std::vector<double>& phi_grid, const PotentialSpec& spec,
                      const QPParams& params, const Profile& profile);
// Level two reuses the level-one curve on the same grid.
IsoCurve trace_curve2(const IsoCurve& level1, const PotentialSpec& spec, const QPParams& params,
                      const Profile& profile);

// Block projector at phi for energy k^2 and whether no block pole lies within the level-two disc.
struct LevelTwoSetup {
  BlockProjector P;
  bool pole_free = true;
};
LevelTwoSetup level_two_setup(double phi, double k, double kappa1, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile);

struct CurveDelta {
  double sup = 0.0;
  double phi = 0.0;
  int common = 0;
};
CurveDelta curve_delta(const IsoCurve& c1, const IsoCurve& c2);
double sup_abs_h(const IsoCurve& c);

void export_curve(const IsoCurve& curve, const std::string& path);
IsoCurve read_curve_csv(const std::string& path);

}  // namespace qp
