#include "qp/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "qp/errors.hpp"

namespace qp {

WaveFunction synthesize(int level, const Vec2& kappa, const LevelInputs& in) {
  if (!in.profile) throw ConfigError("level inputs are incomplete");
  const auto r = projector_level(level, kappa, in);
  WaveFunction wf;
  wf.level = level;
  wf.kappa = kappa;
  wf.lambda = r.lambda;
  wf.support_radius = level == 1 ? in.profile->R : in.profile->R2;
  const auto& idx = box_cached(wf.support_radius);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const cplx c = r.v(static_cast<Eigen::Index>(i));
    if (c != cplx(0.0)) wf.coeffs[idx[i]] = c;
  }
  return wf;
}

WaveFunction plane_wave(const Vec2& kappa) {
  WaveFunction wf;
  wf.level = 0;
  wf.kappa = kappa;
  wf.lambda = kappa.squaredNorm();
  wf.coeffs[LatticeIndex{}] = 1.0;
  return wf;
}

Residual residual(const WaveFunction& wf, const PotentialSpec& spec, const QPParams& params) {
  Residual out;
  for (const auto& [m, v] : wf.coeffs) {
    const double d = (wf.kappa + dual_vector(m, params).p).squaredNorm() - wf.lambda;
    out.g[m] += d * v;
    for (const auto& [q, c] : spec.nonzero()) out.g[m + q] += c * v;
  }
  const int shell = wf.support_radius + spec.max_support_norm();
  for (const auto& [s, g] : out.g) {
    const double a = std::abs(g);
    out.l1 += a;
    out.l2 += a * a;
    const int n = triple_norm(s);
    if (n <= wf.support_radius)
      out.interior_max = std::max(out.interior_max, a);
    else if (n <= shell)
      out.shell_max = std::max(out.shell_max, a);
    else
      out.outside_max = std::max(out.outside_max, a);
  }
  out.l2 = std::sqrt(out.l2);
  return out;
}

double coefficient_l1_distance(const WaveFunction& a, const WaveFunction& b) {
  std::map<LatticeIndex, cplx> d = a.coeffs;
  for (const auto& [m, v] : b.coeffs) d[m] -= v;
  double s = 0.0;
  for (const auto& [m, v] : d) s += std::abs(v);
  return s;
}

cplx evaluate(const WaveFunction& wf, const Vec2& x, const QPParams& params) {
  cplx sum = 0.0;
  for (const auto& [m, v] : wf.coeffs) {
    const double ph = (wf.kappa + dual_vector(m, params).p).dot(x);
    sum += v * cplx(std::cos(ph), std::sin(ph));
  }
  return sum;
}

GridSample sample(const WaveFunction& wf, const WaveFunction& prev, const QPParams& params, int n) {
  GridSample s;
  s.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x(static_cast<double>(i) / n, static_cast<double>(j) / n);
      const cplx psi = evaluate(wf, x, params);
      const cplx before = evaluate(prev, x, params);
      const double ph = -wf.kappa.dot(x);
      const double u = std::abs(cplx(std::cos(ph), std::sin(ph)) * (psi - before));
      s.x.push_back(x);
      s.psi.push_back(psi);
      s.u_abs.push_back(u);
      s.sup_psi = std::max(s.sup_psi, std::abs(psi));
      s.sup_u = std::max(s.sup_u, u);
    }
  return s;
}

double grid_sup_difference(const WaveFunction& a, const WaveFunction& b, const QPParams& params, int n) {
  double sup = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x(static_cast<double>(i) / n, static_cast<double>(j) / n);
      sup = std::max(sup, std::abs(evaluate(a, x, params) - evaluate(b, x, params)));
    }
  return sup;
}

void export_sample_csv(const GridSample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "x1,x2,re_psi,im_psi,abs_u\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.x.size(); ++i)
    out << s.x[i].x() << ',' << s.x[i].y() << ',' << s.psi[i].real() << ',' << s.psi[i].imag() << ',' << s.u_abs[i]
        << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace qp
