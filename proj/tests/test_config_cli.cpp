#include <filesystem>
#include <numbers>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "qp/commands.hpp"
#include "qp/config.hpp"
#include "qp/errors.hpp"
#include "qp/isoenergetic.hpp"
#include "qp/multiscale.hpp"
#include "qp/verify.hpp"

using namespace qp;

namespace {

const std::string kFree = std::string(QP_SOURCE_DIR) + "/configs/free.json";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("qp_cli_test_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation") {
  const auto text = slurp(kFree);
  CHECK_NOTHROW(parse_config(text));
  auto j = nlohmann::json::parse(text);
  j["alpha"]["quadratic"] = {1, 0, 2, 3};
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(text);
  j["alpha"]["quadratic"] = {0, 1, 9, 1};
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(text);
  j["not_a_key"] = 1;
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  CHECK_THROWS_AS(parse_config("{ \"Q\": "), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/qp.json"), Error);
}

TEST_CASE("same seed gives identical reports") {
  const auto cfg = load_config(kFree);
  VerifyOptions o;
  o.only = {1, 6, 8};
  o.timing = false;
  std::ostringstream a, b;
  const auto ra = run_verify(cfg, o, a);
  const auto rb = run_verify(cfg, o, b);
  CHECK(a.str() == b.str());
  CHECK(ra.size() == 3);
  CHECK(exit_code(ra) == 0);
  for (const auto& line : {a.str()}) CHECK(line.find("runtime") == std::string::npos);

  const auto dir = scratch("diff");
  const auto pa = (dir / "a.jsonl").string(), pb = (dir / "b.jsonl").string();
  std::ofstream(pa) << a.str();
  std::ofstream(pb) << b.str();
  CHECK(diff_outputs(pa, pb).identical);
  std::ofstream(pb) << b.str() << "{\"id\":99}\n";
  const auto dr = diff_outputs(pa, pb);
  CHECK_FALSE(dr.identical);
  CHECK(dr.lines_b == dr.lines_a + 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report exit codes") {
  CheckRecord p, f, n;
  f.status = CheckStatus::Fail;
  n.status = CheckStatus::NonConvergent;
  CHECK(exit_code({p, p}) == 0);
  CHECK(exit_code({p, n}) == 3);
  CHECK(exit_code({n, f}) == 1);
  const auto j = nlohmann::json::parse(to_json_line(p, false));
  CHECK(j.contains("measured"));
  CHECK_FALSE(j.contains("runtime"));
}

TEST_CASE("free curve command writes a circle") {
  const auto cfg = load_config(kFree);
  const auto dir = scratch("curve");
  const auto path = (dir / "curve.csv").string();
  run_curve(cfg, 1, 400.0, 64, path);
  const auto c = read_curve_csv(path);
  CHECK(c.samples.size() == 64);
  for (const auto& s : c.samples)
    if (s.admissible) CHECK(s.kappa == doctest::Approx(20.0).epsilon(1e-15));
  const auto again = (dir / "again.csv").string();
  run_curve(cfg, 1, 400.0, 64, again);
  CHECK(diff_outputs(path, again).identical);
  std::filesystem::remove_all(dir);
}

TEST_CASE("free regions command writes no components") {
  const auto cfg = load_config(kFree);
  const auto dir = scratch("regions");
  const auto path = (dir / "regions.json").string();
  // Find an admissible base angle whose resonant set is empty.
  const auto spec = cfg.potential();
  const auto pr = resolve(cfg.profile, 15.0);
  const LevelInputs in{&spec, &cfg.params, &pr, nullptr};
  double phi = -1.0;
  for (int i = 0; i < 256 && phi < 0.0; ++i) {
    const double t = 2.0 * std::numbers::pi * (i + 0.5) / 256.0;
    if (in_O1(t, 15.0, cfg.params, pr)) continue;
    const double kappa1 = solve_radius(1, 225.0, t, in).kappa;
    if (!level_two_setup(t, 15.0, kappa1, spec, cfg.params, pr).pole_free) continue;
    if (build_M2set(t, 15.0, kappa1, spec, cfg.params, pr).points.empty()) phi = t;
  }
  REQUIRE(phi >= 0.0);
  run_regions(cfg, 15.0, phi, path);
  const auto j = nlohmann::json::parse(slurp(path));
  CHECK(j["components"].empty());
  CHECK_THROWS_AS(run_curve(cfg, 3, 400.0, 64, path), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resonant discs must fit inside the exclusion discs") {
  auto j = nlohmann::json::parse(slurp(kFree));
  j["profile"]["m2_disc"] = {{"coef", 0.02}, {"exp", -0.5}};
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
}
