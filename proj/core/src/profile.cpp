#include "qp/profile.hpp"

#include <algorithm>
#include <cmath>

#include "qp/errors.hpp"

namespace qp {

double Scaling::at(double k) const { return coef * std::pow(k, exp); }

namespace {

int floor_at_least(double x, int lo) { return std::max(lo, static_cast<int>(std::floor(x))); }

}  // namespace

Profile resolve(const ProfileSpec& s, double k) {
  if (!(k > 1.0)) throw ConfigError("k must exceed 1");
  Profile p;
  p.k = k;
  p.delta = s.delta;
  p.tau = s.tau;
  p.mu = s.mu;
  p.r1 = s.r1;
  p.r2 = s.r2;
  p.r1p = 40.0 * s.mu * s.r1 + 2.0;
  p.gamma = s.gamma;
  p.delta0 = s.delta0.value_or(s.gamma / 100.0);
  p.delta_star = s.delta_star.value_or(1e4 * s.mu * s.delta);
  p.beta = s.beta.value_or(p.delta_star / 100.0);
  p.gamma_prime = s.gamma_prime;
  p.cq = s.cq;
  p.k_min = s.k_min;

  const double d = s.delta, mu = s.mu;
  p.T1 = s.step1_threshold ? s.step1_threshold->at(k) : s.tau * std::pow(k, 1.0 - 40.0 * mu * d);
  p.Tstar = s.step2_threshold ? s.step2_threshold->at(k) : std::pow(k, p.delta_star);
  p.R = s.box_radius.value_or(floor_at_least(std::pow(k, d), 1));
  p.R_tilde = s.tilde_factor * p.R;
  p.R2 = s.level2_radius.value_or(std::max(p.R_tilde + 1, static_cast<int>(std::floor(std::pow(k, s.r1)))));
  p.R3 = s.level3_radius.value_or(std::max(p.R2 + 1, static_cast<int>(std::floor(std::pow(k, s.r2)))));
  p.W = s.pole_window ? s.pole_window->at(k) : 2.0 * std::pow(k, -2.0 - 40.0 * mu * d);
  p.interval_width =
      s.interval_width ? s.interval_width->at(k) : std::pow(k, -2.0 - d * (40.0 * mu + 1.0));
  p.o2_disc = s.o2_disc ? s.o2_disc->at(k) : std::pow(k, -p.r1p);
  p.m2_disc = s.m2_disc ? s.m2_disc->at(k) : std::pow(k, -10.0 * p.r1p);
  p.simple_threshold = s.simple_threshold ? s.simple_threshold->at(k) : std::pow(k, -5.0 * p.r1p);
  p.simple_radius = s.simple_radius.value_or(floor_at_least(std::pow(k, s.r1 / 2.0), 1));

  const double g = s.gamma * s.r1, d0 = p.delta0 * s.r1;
  p.black_box = s.black_box.value_or(floor_at_least(std::pow(k, g), 1));
  p.black_count = s.black_count.value_or(floor_at_least(std::pow(k, g / 2.0 + d0), 1));
  p.black_radius = s.black_radius.value_or(floor_at_least(std::pow(k, g + d0), 1));
  p.grey_box = s.grey_box.value_or(floor_at_least(std::pow(k, g / 2.0 + 2.0 * d0), 1));
  p.grey_count = s.grey_count.value_or(floor_at_least(std::pow(k, g / 6.0 - d0), 1));
  p.grey_radius = p.grey_box;
  p.white_radius = s.white_radius.value_or(floor_at_least(std::pow(k, g / 6.0), 1));
  p.counting_radius = s.counting_radius.value_or(floor_at_least(std::pow(k, s.gamma_prime * s.r1), 1));

  p.pole_scan = s.pole_scan;
  p.bisect_tol = s.bisect_tol;
  p.r_max = s.r_max;
  p.quad_tol = s.quad_tol;
  p.contour_hit = s.contour_hit;
  p.nonconv_ratio = s.nonconv_ratio;
  p.nonconv_run = s.nonconv_run;
  p.newton_max = s.newton_max;
  p.solve_tol = s.solve_tol;
  p.quad_min_nodes = s.quad_min_nodes;
  p.quad_max_nodes = s.quad_max_nodes;

  if (!(p.T1 > 0 && p.Tstar > 0 && p.W > 0 && p.o2_disc > 0 && p.m2_disc > 0 && p.interval_width > 0))
    throw ConfigError("profile thresholds must be positive");
  // The level-two exclusion discs must contain the M2 pole discs, or M2 reaches into the level-two box.
  if (p.m2_disc > p.o2_disc) throw ConfigError("m2_disc must not exceed o2_disc");
  if (!(p.Tstar < p.T1)) throw ConfigError("step-two threshold must stay below the step-one threshold");
  if (p.R < 1 || p.R_tilde < p.R || p.R2 <= p.R_tilde || p.R3 <= p.R2)
    throw ConfigError("profile radii must satisfy 1 <= R <= R_tilde < R2 < R3");
  return p;
}

}  // namespace qp
