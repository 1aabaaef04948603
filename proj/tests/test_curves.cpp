#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "fixture.hpp"
#include "qp/isoenergetic.hpp"

using namespace qp;

TEST_CASE("free radius solve and circle") {
  qpt::Desk d;
  const double lambda = 625.0;
  const auto pr = d.profile(std::sqrt(lambda));
  const LevelInputs in{&d.free, &d.params, &pr, nullptr};
  const auto rs = solve_radius(1, lambda, 0.3, in);
  CHECK(rs.kappa == doctest::Approx(25.0).epsilon(1e-15));
  const auto c = trace_curve1(lambda, uniform_phi_grid(128), d.free, d.params, pr);
  const auto om = build_omega1(25.0, d.params, pr);
  int admissible = 0;
  for (const auto& s : c.samples) {
    if (!s.admissible) {
      CHECK(om.excluded.contains(s.phi));
      continue;
    }
    ++admissible;
    CHECK(s.kappa == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(s.h == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(admissible > 0);
  const auto c2 = trace_curve2(c, d.free, d.params, pr);
  CHECK(curve_delta(c, c2).sup == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perturbed curve solves the radius equation") {
  qpt::Desk d;
  const double lambda = 225.0;
  const auto pr = d.profile(15.0);
  const auto c = trace_curve1(lambda, uniform_phi_grid(64), d.spec, d.params, pr);
  int admissible = 0;
  for (const auto& s : c.samples)
    if (s.admissible) {
      ++admissible;
      CHECK(std::abs(s.residual) <= 1e-9 * lambda);
      CHECK(std::abs(s.h) < 0.1);
    }
  CHECK(admissible > 0);
}

TEST_CASE("curve export round trip") {
  qpt::Desk d;
  const auto dir = std::filesystem::temp_directory_path() / "qp_curve_test";
  std::filesystem::create_directories(dir);
  const auto pr = d.profile(15.0);
  const auto c = trace_curve1(225.0, uniform_phi_grid(32), d.spec, d.params, pr);
  const auto path = (dir / "c.csv").string();
  export_curve(c, path);
  const auto back = read_curve_csv(path);
  REQUIRE(back.samples.size() == c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    CHECK(back.samples[i].phi == c.samples[i].phi);
    CHECK(back.samples[i].kappa == c.samples[i].kappa);
    CHECK(back.samples[i].admissible == c.samples[i].admissible);
  }
  const auto empty = trace_curve1(225.0, {}, d.spec, d.params, pr);
  const auto epath = (dir / "e.csv").string();
  export_curve(empty, epath);
  CHECK(read_curve_csv(epath).samples.empty());
  CHECK(std::filesystem::file_size(epath) == std::string("phi,kappa,h,dkappa_dphi,admissible\n").size());
  std::filesystem::remove_all(dir);
}
