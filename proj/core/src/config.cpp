#include "qp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qp/errors.hpp"

namespace qp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& field, const std::string& msg) {
  throw ConfigError(source + ": field '" + field + "': " + msg);
}

class Reader {
 public:
  Reader(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail(source_, path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail(source_, name(it.key()), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& source() const { return source_; }

  double number(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(source_, name(key), "expected a number");
    return v.get<double>();
  }
  double positive(const char* key) const {
    const double v = number(key);
    if (!(v > 0)) fail(source_, name(key), "must be positive");
    return v;
  }
  std::int64_t integer(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) fail(source_, name(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  int positive_int(const char* key) const {
    const auto v = integer(key);
    if (v <= 0) fail(source_, name(key), "must be a positive integer");
    return static_cast<int>(v);
  }
  std::string string(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(source_, name(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_array() || v.empty()) fail(source_, name(key), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(source_, name(key), "expected a non-empty array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::vector<std::int64_t> integers(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_array() || v.empty()) fail(source_, name(key), "expected a non-empty array of integers");
    std::vector<std::int64_t> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) fail(source_, name(key), "expected a non-empty array of integers");
      out.push_back(x.get<std::int64_t>());
    }
    return out;
  }
  Reader child(const char* key) const { return Reader(j_.at(key), name(key), source_); }

 private:
  const json& j_;
  std::string path_;
  const std::string& source_;
};

Scaling scaling(const Reader& r, const char* key) {
  const auto c = r.child(key);
  c.allow({"coef", "exp"});
  Scaling s;
  s.coef = c.positive("coef");
  s.exp = c.has("exp") ? c.number("exp") : 0.0;
  return s;
}

ProfileSpec read_profile(const Reader& r) {
  r.allow({"delta", "tau", "r1", "r2", "gamma", "delta0", "delta_star", "beta", "gamma_prime", "k_min", "cq",
           "step1_threshold", "step2_threshold", "box_radius", "tilde_factor", "level2_radius", "level3_radius",
           "pole_window", "interval_width", "o2_disc", "m2_disc", "simple_threshold", "simple_radius", "black_box",
           "black_count", "black_radius", "grey_box", "grey_count", "white_radius", "counting_radius", "pole_scan",
           "bisect_tol", "r_max", "quad_tol", "contour_hit", "nonconv_ratio", "nonconv_run", "newton_max",
           "solve_tol", "quad_min_nodes", "quad_max_nodes"});
  ProfileSpec p;
  auto num = [&](const char* key, double& dst) {
    if (r.has(key)) dst = r.positive(key);
  };
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (r.has(key)) dst = r.positive(key);
  };
  auto scal = [&](const char* key, std::optional<Scaling>& dst) {
    if (r.has(key)) dst = scaling(r, key);
  };
  auto iopt = [&](const char* key, std::optional<int>& dst) {
    if (r.has(key)) dst = r.positive_int(key);
  };
  auto ival = [&](const char* key, int& dst) {
    if (r.has(key)) dst = r.positive_int(key);
  };
  num("delta", p.delta);
  num("tau", p.tau);
  num("r1", p.r1);
  num("r2", p.r2);
  num("gamma", p.gamma);
  opt("delta0", p.delta0);
  opt("delta_star", p.delta_star);
  opt("beta", p.beta);
  num("gamma_prime", p.gamma_prime);
  num("k_min", p.k_min);
  num("cq", p.cq);
  scal("step1_threshold", p.step1_threshold);
  scal("step2_threshold", p.step2_threshold);
  iopt("box_radius", p.box_radius);
  ival("tilde_factor", p.tilde_factor);
  iopt("level2_radius", p.level2_radius);
  iopt("level3_radius", p.level3_radius);
  scal("pole_window", p.pole_window);
  scal("interval_width", p.interval_width);
  scal("o2_disc", p.o2_disc);
  scal("m2_disc", p.m2_disc);
  scal("simple_threshold", p.simple_threshold);
  iopt("simple_radius", p.simple_radius);
  iopt("black_box", p.black_box);
  iopt("black_count", p.black_count);
  iopt("black_radius", p.black_radius);
  iopt("grey_box", p.grey_box);
  iopt("grey_count", p.grey_count);
  iopt("white_radius", p.white_radius);
  iopt("counting_radius", p.counting_radius);
  ival("pole_scan", p.pole_scan);
  num("bisect_tol", p.bisect_tol);
  ival("r_max", p.r_max);
  num("quad_tol", p.quad_tol);
  num("contour_hit", p.contour_hit);
  num("nonconv_ratio", p.nonconv_ratio);
  ival("nonconv_run", p.nonconv_run);
  ival("newton_max", p.newton_max);
  num("solve_tol", p.solve_tol);
  ival("quad_min_nodes", p.quad_min_nodes);
  ival("quad_max_nodes", p.quad_max_nodes);
  if (p.nonconv_ratio >= 1.0) fail(r.source(), r.name("nonconv_ratio"), "must be below 1");
  return p;
}

VerifySettings read_verify(const Reader& r) {
  r.allow({"oracle1_points", "oracle2_points", "pole_windows", "derivative_points", "identity_points",
           "multiscale_points", "counting_centers", "counting_kappa0", "counting_constant", "counting_r", "lattice_r",
           "lattice_cf",
           "eigenfunction_phi", "eigenfunction_grid", "band_windows"});
  VerifySettings v;
  auto ival = [&](const char* key, int& dst) {
    if (r.has(key)) dst = r.positive_int(key);
  };
  ival("oracle1_points", v.oracle1_points);
  ival("oracle2_points", v.oracle2_points);
  ival("pole_windows", v.pole_windows);
  ival("derivative_points", v.derivative_points);
  ival("identity_points", v.identity_points);
  ival("multiscale_points", v.multiscale_points);
  ival("counting_centers", v.counting_centers);
  ival("counting_kappa0", v.counting_kappa0);
  ival("eigenfunction_grid", v.eigenfunction_grid);
  ival("band_windows", v.band_windows);
  if (r.has("counting_constant")) v.counting_constant = r.positive("counting_constant");
  if (r.has("counting_r")) v.counting_r = r.positive("counting_r");
  if (r.has("lattice_r")) {
    v.lattice_r = r.numbers("lattice_r");
    for (double x : v.lattice_r)
      if (!(x > 0)) fail(r.source(), r.name("lattice_r"), "entries must be positive");
  }
  if (r.has("lattice_cf")) {
    v.lattice_cf = r.integers("lattice_cf");
    try {
      (void)QPParams::from_continued_fraction(v.lattice_cf);
    } catch (const ConfigError& e) {
      fail(r.source(), r.name("lattice_cf"), e.what());
    }
  }
  if (r.has("eigenfunction_phi")) v.eigenfunction_phi = r.number("eigenfunction_phi");
  return v;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << source << ": line " << line_of(text, e.byte > 0 ? e.byte - 1 : 0) << ": " << e.what();
    throw ConfigError(os.str());
  }
  const Reader r(j, "", source);
  r.allow({"alpha", "mu", "Q", "generators", "profile", "k_grid", "lambda_grid", "phi_grid", "phi_grid_level2",
           "output_dir", "seed", "verify"});
  RunConfig cfg;
  cfg.source = source;
  const double mu = r.has("mu") ? r.number("mu") : 2.0;

  if (!r.has("alpha")) fail(source, "alpha", "missing");
  {
    const auto a = r.child("alpha");
    a.allow({"quadratic", "cf"});
    if (a.has("quadratic") == a.has("cf")) fail(source, "alpha", "give exactly one of 'quadratic' or 'cf'");
    try {
      if (a.has("quadratic")) {
        const auto v = a.integers("quadratic");
        if (v.size() != 4) fail(source, "alpha.quadratic", "expected [a, b, d, c]");
        cfg.params = QPParams::from_quadratic(v[0], v[1], v[2], v[3], mu);
      } else {
        cfg.params = QPParams::from_continued_fraction(a.integers("cf"), mu);
      }
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind(source, 0) == 0) throw;
      fail(source, a.has("quadratic") ? "alpha.quadratic" : "alpha.cf", e.what());
    }
  }

  if (r.has("Q")) cfg.Q = r.positive_int("Q");
  if (!r.has("generators")) fail(source, "generators", "missing");
  {
    const auto& g = r.at("generators");
    if (!g.is_array()) fail(source, "generators", "expected an array");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string field = "generators[" + std::to_string(i) + "]";
      const Reader e(g[i], field, source);
      e.allow({"index", "value"});
      if (!e.has("index") || !e.has("value")) fail(source, field, "needs 'index' and 'value'");
      const auto idx = e.integers("index");
      if (idx.size() != 4) fail(source, field + ".index", "expected four integers");
      const auto val = e.numbers("value");
      if (val.size() != 2) fail(source, field + ".value", "expected [re, im]");
      cfg.generators.push_back({LatticeIndex::make(static_cast<int>(idx[0]), static_cast<int>(idx[1]),
                                                   static_cast<int>(idx[2]), static_cast<int>(idx[3])),
                                cplx(val[0], val[1])});
    }
  }
  if (r.has("profile")) cfg.profile = read_profile(r.child("profile"));
  cfg.profile.mu = mu;

  if (r.has("k_grid")) cfg.k_grid = r.numbers("k_grid");
  for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
    if (!(cfg.k_grid[i] > 1.0)) fail(source, "k_grid", "entries must exceed 1");
    if (i > 0 && !(cfg.k_grid[i] > cfg.k_grid[i - 1])) fail(source, "k_grid", "must be strictly ascending");
  }
  if (r.has("lambda_grid")) cfg.lambda_grid = r.numbers("lambda_grid");
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    if (!(cfg.lambda_grid[i] > 1.0)) fail(source, "lambda_grid", "entries must exceed 1");
    if (i > 0 && !(cfg.lambda_grid[i] > cfg.lambda_grid[i - 1]))
      fail(source, "lambda_grid", "must be strictly ascending");
  }
  if (r.has("phi_grid")) cfg.phi_grid = r.positive_int("phi_grid");
  if (r.has("phi_grid_level2")) cfg.phi_grid_level2 = r.positive_int("phi_grid_level2");
  if (r.has("output_dir")) cfg.output_dir = r.string("output_dir");
  if (r.has("seed")) {
    const auto s = r.integer("seed");
    if (s < 0) fail(source, "seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (r.has("verify")) cfg.verify = read_verify(r.child("verify"));

  try {
    (void)cfg.potential();
    for (double k : cfg.k_grid) (void)resolve(cfg.profile, k);
    for (double lambda : cfg.lambda_grid) (void)resolve(cfg.profile, std::sqrt(lambda));
  } catch (const Error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace qp
