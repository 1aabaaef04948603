#include "qp/isoenergetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "qp/errors.hpp"
#include "qp/fiber.hpp"

namespace qp {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 polar_point(double kappa, double phi) { return Vec2(kappa * std::cos(phi), kappa * std::sin(phi)); }

bool numerical_failure(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NonConvergent:
    case ErrorKind::ContourHit:
    case ErrorKind::NoRoot:
    case ErrorKind::NotUnique:
    case ErrorKind::OverlapDetected:
      return true;
    default:
      return false;
  }
}

void finish_curve(IsoCurve& c) {
  const auto n = c.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = c.samples[i];
    if (!s.admissible || n < 3) continue;
    const auto& a = c.samples[(i + n - 1) % n];
    const auto& b = c.samples[(i + 1) % n];
    auto gap = [](double x, double y) {
      double d = y - x;
      if (d <= 0) d += 2.0 * kPi;
      return d;
    };
    if (a.admissible && b.admissible)
      s.dkappa_dphi = (b.kappa - a.kappa) / (gap(a.phi, s.phi) + gap(s.phi, b.phi));
    else if (b.admissible)
      s.dkappa_dphi = (b.kappa - s.kappa) / gap(s.phi, b.phi);
    else if (a.admissible)
      s.dkappa_dphi = (s.kappa - a.kappa) / gap(a.phi, s.phi);
  }
  // Holes are maximal runs of inadmissible grid points, joined across phi = 0.
  std::vector<Interval> runs;
  for (std::size_t i = 0; i < n;) {
    if (c.samples[i].admissible) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && !c.samples[j + 1].admissible) ++j;
    runs.push_back({c.samples[i].phi, c.samples[j].phi});
    i = j + 1;
  }
  if (runs.size() >= 2 && !c.samples.front().admissible && !c.samples.back().admissible) {
    runs.back().hi = runs.front().hi + 2.0 * kPi;
    runs.erase(runs.begin());
  }
  c.holes = runs;
}

}  // namespace

RadiusSolve solve_in_bracket(const std::function<double(double)>& lambda_of_kappa, double lambda, double start,
                             double lo, double hi, int scan, const Profile& profile) {
  scan = std::max(1, scan);
  std::vector<double> xs(scan + 1), fs(scan + 1);
  int changes = 0, at = -1;
  for (int i = 0; i <= scan; ++i) {
    xs[i] = lo + (hi - lo) * i / scan;
    fs[i] = lambda_of_kappa(xs[i]) - lambda;
    if (i > 0 && (fs[i - 1] < 0) != (fs[i] < 0)) {
      ++changes;
      at = i - 1;
    }
  }
  if (changes == 0) {
    std::ostringstream os;
    os << "no root of the isoenergetic equation in [" << lo << ", " << hi << "]";
    throw NoRoot(os.str());
  }
  if (changes > 1) {
    std::ostringstream os;
    os << changes << " roots of the isoenergetic equation in [" << lo << ", " << hi << "]";
    throw NotUnique(os.str());
  }
  double a = xs[at], b = xs[at + 1], fa = fs[at];
  RadiusSolve out;
  double x = (start > a && start < b) ? start : 0.5 * (a + b);
  double fx = lambda_of_kappa(x) - lambda;
  const double eps = 4.0 * std::numeric_limits<double>::epsilon();
  for (int it = 0; it < profile.newton_max; ++it) {
    ++out.iterations;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
    }
    const double step = fx / (2.0 * x);
    const double next = x - step;
    if (!(next > a && next < b)) break;
    x = next;
    fx = lambda_of_kappa(x) - lambda;
    if (std::abs(step) <= eps * x) {
      out.kappa = x;
      out.residual = fx;
      return out;
    }
  }
  if (std::abs(fx) <= profile.solve_tol * lambda && out.iterations < profile.newton_max) {
    out.kappa = x;
    out.residual = fx;
    return out;
  }
  out.bisected = true;
  while (b - a > eps * b) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = lambda_of_kappa(m) - lambda;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  out.kappa = 0.5 * (a + b);
  out.residual = lambda_of_kappa(out.kappa) - lambda;
  return out;
}

double level1_bracket(double lambda, const Profile& profile) { return profile.T1 / (32.0 * std::sqrt(lambda)); }

RadiusSolve solve_radius(int level, double lambda, double phi, const LevelInputs& in, double start) {
  if (!in.spec || !in.params || !in.profile) throw ConfigError("level inputs are incomplete");
  const Profile& prof = *in.profile;
  const double k = std::sqrt(lambda);
  double radius = 0.0;
  auto lam = [&](double kap) {
    const auto r = eigenvalue_level(level, polar_point(kap, phi), in);
    radius = r.radius;
    return r.lambda;
  };
  if (level == 1) {
    if (in.spec->is_zero()) return {k, 0.0, 0, false, 0.0};
    const double w = level1_bracket(lambda, prof);
    auto s = solve_in_bracket(lam, lambda, start > 0 ? start : k, k - w, k + w, 4, prof);
    s.radius = radius;
    return s;
  }
  if (level == 2) {
    const double k1 = start > 0 ? start : solve_radius(1, lambda, phi, in).kappa;
    lam(k1);
    const double w = radius / (4.0 * k);
    auto s = solve_in_bracket(lam, lambda, k1, k1 - w, k1 + w, 1, prof);
    s.radius = radius;
    return s;
  }
  throw ConfigError("isoenergetic curves are available for levels 1 and 2");
}

std::vector<double> uniform_phi_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(std::max(0, n)));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = 2.0 * kPi * i / n;
  return g;
}

IsoCurve trace_curve1(double lambda, const std::vector<double>& phi_grid, const PotentialSpec& spec,
                      const QPParams& params, const Profile& profile) {
  IsoCurve c;
  c.level = 1;
  c.lambda = lambda;
  const double k = std::sqrt(lambda);
  LevelInputs in{&spec, &params, &profile, nullptr};
  for (double phi : phi_grid) {
    CurveSample s;
    s.phi = phi;
    if (!in_O1(phi, k, params, profile)) {
      try {
        const auto r = solve_radius(1, lambda, phi, in);
        s.kappa = r.kappa;
        s.residual = r.residual;
        s.h = r.kappa - k;
        s.admissible = true;
      } catch (const Error& e) {
        if (!numerical_failure(e)) throw;
        ++c.structural_failures;
      }
    }
    c.samples.push_back(s);
  }
  finish_curve(c);
  return c;
}

LevelTwoSetup level_two_setup(double phi, double k, double kappa1, const PotentialSpec& spec, const QPParams& params,
                              const Profile& profile) {
  LevelTwoSetup out;
  auto d = classify(phi, k, profile.R2, spec, params, profile);
  strength(d, spec, params, profile);
  out.P = assemble_projector(d, spec, params, profile, profile.R2);
  const Interval disc{phi - profile.o2_disc, phi + profile.o2_disc};
  const KappaOfPhi fixed = [kappa1](double) { return kappa1; };
  for (std::size_t b = 1; b < out.P.blocks.size() && out.pole_free; ++b)
    if (!block_poles(out.P.blocks[b].indices, k, disc, spec, params, profile, fixed).empty()) out.pole_free = false;
  return out;
}

IsoCurve trace_curve2(const IsoCurve& level1, const PotentialSpec& spec, const QPParams& params,
                      const Profile& profile) {
  IsoCurve c;
  c.level = 2;
  c.lambda = level1.lambda;
  const double k = std::sqrt(level1.lambda);
  for (const auto& s1 : level1.samples) {
    CurveSample s;
    s.phi = s1.phi;
    if (s1.admissible) {
      try {
        const auto setup = level_two_setup(s1.phi, k, s1.kappa, spec, params, profile);
        if (setup.pole_free) {
          LevelInputs in{&spec, &params, &profile, &setup.P};
          const auto r = solve_radius(2, level1.lambda, s1.phi, in, s1.kappa);
          s.kappa = r.kappa;
          s.residual = r.residual;
          s.h = r.kappa - s1.kappa;
          s.admissible = true;
        }
      } catch (const Error& e) {
        if (!numerical_failure(e)) throw;
        ++c.structural_failures;
      }
    }
    c.samples.push_back(s);
  }
  finish_curve(c);
  return c;
}

CurveDelta curve_delta(const IsoCurve& c1, const IsoCurve& c2) {
  CurveDelta d;
  const auto n = std::min(c1.samples.size(), c2.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!c1.samples[i].admissible || !c2.samples[i].admissible) continue;
    ++d.common;
    const double v = std::abs(c2.samples[i].kappa - c1.samples[i].kappa);
    if (v > d.sup) {
      d.sup = v;
      d.phi = c1.samples[i].phi;
    }
  }
  return d;
}

double sup_abs_h(const IsoCurve& c) {
  double s = 0.0;
  for (const auto& x : c.samples)
    if (x.admissible) s = std::max(s, std::abs(x.h));
  return s;
}

void export_curve(const IsoCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "phi,kappa,h,dkappa_dphi,admissible\n" << std::setprecision(17);
  for (const auto& s : curve.samples)
    out << s.phi << ',' << s.kappa << ',' << s.h << ',' << s.dkappa_dphi << ',' << (s.admissible ? 1 : 0) << '\n';
  if (!out) throw IoError("write failed for " + path);
  nlohmann::json side;
  side["level"] = curve.level;
  side["lambda"] = curve.lambda;
  side["holes"] = nlohmann::json::array();
  for (const auto& h : curve.holes) side["holes"].push_back({h.lo, h.hi});
  side["structural_failures"] = curve.structural_failures;
  std::ofstream js(path + ".holes.json");
  if (!js) throw IoError("cannot open " + path + ".holes.json");
  js << std::setprecision(17) << side.dump(2) << '\n';
}

IsoCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  IsoCurve c;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    CurveSample s;
    char comma = 0;
    int adm = 0;
    ls >> s.phi >> comma >> s.kappa >> comma >> s.h >> comma >> s.dkappa_dphi >> comma >> adm;
    if (!ls) throw IoError("malformed row in " + path);
    s.admissible = adm != 0;
    c.samples.push_back(s);
  }
  return c;
}

}  // namespace qp
