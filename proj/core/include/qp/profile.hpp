#pragma once

#include <optional>

namespace qp {

// coef * k^exp
struct Scaling {
  double coef = 1.0;
  double exp = 0.0;
  double at(double k) const;
};

// Exponents and optional overrides. Unset overrides fall back to the asymptotic formulas.
struct ProfileSpec {
  double delta = 1e-5;
  double tau = 1.0;
  double mu = 2.0;
  double r1 = 0.35;
  double r2 = 0.5;
  double gamma = 0.2;
  std::optional<double> delta0;      // gamma / 100
  std::optional<double> delta_star;  // 1e4 mu delta
  std::optional<double> beta;        // delta_star / 100
  double gamma_prime = 1.0;
  double k_min = 10.0;
  double cq = 1.0;  // C(Q), measured per potential

  std::optional<Scaling> step1_threshold;
  std::optional<Scaling> step2_threshold;
  std::optional<int> box_radius;
  int tilde_factor = 4;
  std::optional<int> level2_radius;
  std::optional<int> level3_radius;
  std::optional<Scaling> pole_window;
  std::optional<Scaling> interval_width;
  std::optional<Scaling> o2_disc;
  std::optional<Scaling> m2_disc;
  std::optional<Scaling> simple_threshold;
  std::optional<int> simple_radius;
  std::optional<int> black_box;
  std::optional<int> black_count;
  std::optional<int> black_radius;
  std::optional<int> grey_box;
  std::optional<int> grey_count;
  std::optional<int> white_radius;
  std::optional<int> counting_radius;

  int pole_scan = 400;
  double bisect_tol = 1e-12;
  int r_max = 30;
  double quad_tol = 1e-12;
  double contour_hit = 1e-8;
  double nonconv_ratio = 0.75;
  int nonconv_run = 3;
  int newton_max = 25;
  double solve_tol = 1e-9;
  int quad_min_nodes = 32;
  int quad_max_nodes = 4096;
};

// Every threshold resolved to a number for one value of k.
struct Profile {
  double k = 0.0;
  double delta = 0.0, tau = 0.0, mu = 0.0, r1 = 0.0, r2 = 0.0, r1p = 0.0;
  double gamma = 0.0, delta0 = 0.0, delta_star = 0.0, beta = 0.0, gamma_prime = 1.0, cq = 1.0;
  double k_min = 0.0;

  double T1 = 0.0;      // step-one resonance threshold
  double Tstar = 0.0;   // step-two resonance threshold
  int R = 1;            // k^delta box
  int R_tilde = 4;      // enlarged step-one box
  int R2 = 2;           // k^{r1} box
  int R3 = 3;           // k^{r2} box
  double W = 0.0;       // strength window
  double interval_width = 0.0;
  double o2_disc = 0.0;
  double m2_disc = 0.0;
  double simple_threshold = 0.0;
  int simple_radius = 1;
  int black_box = 1, black_count = 1, black_radius = 1;
  int grey_box = 1, grey_count = 1, grey_radius = 1;
  int white_radius = 1;
  int counting_radius = 1;

  int pole_scan = 400;
  double bisect_tol = 1e-12;
  int r_max = 30;
  double quad_tol = 1e-12;
  double contour_hit = 1e-8;
  double nonconv_ratio = 0.75;
  int nonconv_run = 3;
  int newton_max = 25;
  double solve_tol = 1e-9;
  int quad_min_nodes = 32;
  int quad_max_nodes = 4096;
};

Profile resolve(const ProfileSpec& spec, double k);

}  // namespace qp
