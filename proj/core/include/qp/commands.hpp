#pragma once

#include <string>

#include "qp/config.hpp"

namespace qp {

// Writes the level-1 or level-2 isoenergetic curve at lambda as CSV plus a holes sidecar.
void run_curve(const RunConfig& cfg, int level, double lambda, int grid, const std::string& out);

// Writes the region map JSON around the base angle phi at energy k^2.
void run_regions(const RunConfig& cfg, double k, double phi, const std::string& out);

// Level eigenvalue at kappa1(phi) nu(phi) with its oracle comparison, as a JSON object.
std::string run_eigen(const RunConfig& cfg, int level, double k, double phi);

// Writes the sampled wavefunction and its correction as CSV.
void run_wavefunction(const RunConfig& cfg, int level, double k, double phi, int grid, const std::string& out);

}  // namespace qp
