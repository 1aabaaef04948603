#pragma once

#include <cmath>

#include "qp/lattice.hpp"
#include "qp/potential.hpp"
#include "qp/profile.hpp"

namespace qpt {

inline qp::ProfileSpec desk_profile() {
  qp::ProfileSpec ps;
  ps.step1_threshold = qp::Scaling{0.4, 0.5};
  ps.step2_threshold = qp::Scaling{0.5, 0.2};
  ps.box_radius = 1;
  ps.tilde_factor = 2;
  ps.level2_radius = 4;
  ps.level3_radius = 8;
  ps.o2_disc = qp::Scaling{5e-4, -0.5};
  ps.m2_disc = qp::Scaling{5e-4, -0.5};
  ps.simple_threshold = qp::Scaling{0.5, 0.0};
  ps.simple_radius = 1;
  ps.black_box = 2;
  ps.black_count = 2;
  ps.black_radius = 2;
  ps.grey_box = 2;
  ps.grey_count = 1;
  ps.white_radius = 1;
  return ps;
}

struct Desk {
  qp::QPParams params = qp::QPParams::sqrt2_minus_1();
  qp::PotentialSpec spec = qp::build({{qp::LatticeIndex::make(1, 0, 0, 0), {0.08, 0.0}},
                                      {qp::LatticeIndex::make(0, 0, 0, 1), {0.06, 0.0}}},
                                     4, params);
  qp::PotentialSpec free = qp::build({}, 4, params);
  qp::ProfileSpec profile_spec = desk_profile();
  qp::Profile profile(double k) const { return qp::resolve(profile_spec, k); }
};

inline qp::Vec2 along(double phi) { return {std::cos(phi), std::sin(phi)}; }

}  // namespace qpt
