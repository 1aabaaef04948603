#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"

namespace qp {

// Sample sizes and evaluation settings for the acceptance checks.
struct VerifySettings {
  int oracle1_points = 100;
  int oracle2_points = 30;
  int pole_windows = 50;
  int derivative_points = 50;
  int identity_points = 8;
  int multiscale_points = 5;
  int counting_centers = 20;
  int counting_kappa0 = 10;
  double counting_constant = 1.0;
  double counting_r = 1.0;  // radius exponent for the curve-neighborhood count
  std::vector<double> lattice_r{0.6, 0.8, 1.0};
  // Second rotation number for the lattice checks; a large partial quotient makes the cluster hypothesis hold.
  std::vector<std::int64_t> lattice_cf{0, 1, 2, 3000, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double eigenfunction_phi = 1.0;
  int eigenfunction_grid = 64;
  int band_windows = 6;
};

struct RunConfig {
  QPParams params;
  int Q = 4;
  std::vector<std::pair<LatticeIndex, cplx>> generators;
  ProfileSpec profile;
  std::vector<double> k_grid{15, 25, 40, 60};
  std::vector<double> lambda_grid{225, 625, 1600, 3600};
  int phi_grid = 1024;
  int phi_grid_level2 = 64;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  VerifySettings verify;
  std::string source;  // file the config was read from

  PotentialSpec potential() const { return build(generators, Q, params); }
};

// Throws ConfigError naming the offending field, or the line for syntax errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

}  // namespace qp
