#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"

#include "fixture.hpp"
#include "qp/errors.hpp"
#include "qp/fiber.hpp"
#include "qp/potential.hpp"

using namespace qp;

TEST_CASE("potential symmetry closure") {
  const auto a = QPParams::sqrt2_minus_1();
  CHECK(build({}, 4, a).is_zero());
  const auto q = LatticeIndex::make(1, 0, 0, 1);
  const cplx v{0.07, 0.02};
  const auto spec = build({{q, v}}, 4, a);
  CHECK(coefficient(spec, q) == v);
  CHECK(coefficient(spec, -q) == std::conj(v));
  CHECK(spec.in_SQ(2 * q));
  CHECK(spec.in_SQ(-2 * q));
  CHECK(coefficient(spec, 2 * q) == cplx{0.0, 0.0});
  CHECK_FALSE(spec.in_SQ(LatticeIndex::make(0, 1, 0, 0)));
  CHECK(coefficient(spec, LatticeIndex::make(0, 1, 0, 0)) == cplx{0.0, 0.0});
  CHECK(coefficient(spec, LatticeIndex{}) == cplx{0.0, 0.0});
  CHECK_NOTHROW(build({{q, v}, {2 * q, cplx{0.01, 0.0}}}, 4, a));
  CHECK(spec.l1_norm() == doctest::Approx(2.0 * std::abs(v)));
  // The full-table rebuild is a fixpoint.
  const auto again = rebuild(spec, a);
  CHECK(again.coeffs == spec.coeffs);
}

TEST_CASE("potential evaluation") {
  const auto a = QPParams::sqrt2_minus_1();
  const auto q = LatticeIndex::make(1, 0, 1, 0);
  const double v = 0.08;
  const auto spec = build({{q, {v, 0.0}}}, 4, a);
  const auto pq = dual_vector(q, a).p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x{u(rng), u(rng)};
    CHECK(evaluate(spec, x, a) == doctest::Approx(2.0 * v * std::cos(pq.dot(x))).epsilon(1e-12));
    CHECK(std::abs(evaluate_complex(spec, x, a).imag()) < 1e-14);
    CHECK(evaluate(build({}, 4, a), x, a) == 0.0);
  }
  qpt::Desk d;
  double sum = 0.0;
  for (const auto& [m, c] : d.spec.nonzero()) sum += c.real();
  CHECK(evaluate(d.spec, Vec2{0.0, 0.0}, d.params) == doctest::Approx(sum));
}

TEST_CASE("directional sublattice") {
  qpt::Desk d;
  const auto g = LatticeIndex::make(1, 0, 0, 0);
  const auto ds = directional_sublattice(d.spec, g, d.params);
  CHECK(ds.generator == g);
  CHECK(ds.p_q == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(directional_sublattice(d.spec, 2 * g, d.params).generator == g);
}

TEST_CASE("fiber assembly") {
  qpt::Desk d;
  const Vec2 kappa{3.1, -0.7};
  const auto& box = enumerate_box(1);
  const auto M0 = assemble(kappa, box, d.free, d.params);
  const auto diag = free_diagonal(kappa, box, d.params);
  for (int i = 0; i < M0.H.rows(); ++i)
    for (int j = 0; j < M0.H.cols(); ++j)
      CHECK(M0.H(i, j) == (i == j ? cplx{diag[i], 0.0} : cplx{0.0, 0.0}));
  const auto one = assemble(kappa, {LatticeIndex::make(0, 1, 0, 0)}, d.spec, d.params);
  CHECK(one.H.rows() == 1);
  CHECK(one.H(0, 0).real() == doctest::Approx((kappa + dual_vector(LatticeIndex::make(0, 1, 0, 0), d.params).p).squaredNorm()));
  const auto M = assemble(kappa, box, d.spec, d.params);
  CHECK((M.H - M.H.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble(kappa, {LatticeIndex{}, LatticeIndex{}}, d.spec, d.params), DuplicateIndex);
}

TEST_CASE("oracle on a two by two block") {
  qpt::Desk d;
  const auto g = LatticeIndex::make(1, 0, 0, 0);
  const Vec2 kappa{-3.0, 0.4};
  const auto M = assemble(kappa, {LatticeIndex{}, g}, d.spec, d.params);
  const double a = M.H(0, 0).real(), b = M.H(1, 1).real(), c = std::abs(M.H(0, 1));
  CHECK(c == doctest::Approx(0.08));
  const double mid = 0.5 * (a + b), rad = std::sqrt(0.25 * (a - b) * (a - b) + c * c);
  const auto sd = eig_oracle(M);
  CHECK(sd.eigenvalues[0] == doctest::Approx(mid - rad).epsilon(1e-13));
  CHECK(sd.eigenvalues[1] == doctest::Approx(mid + rad).epsilon(1e-13));
  CHECK(sd.eigenvalues.sum() == doctest::Approx(M.H.trace().real()).epsilon(1e-13));
  CHECK(sd.residual_norm < 1e-12);
}

TEST_CASE("oracle properties on the unit box") {
  qpt::Desk d;
  const Vec2 kappa{2.2, 1.3};
  const auto M = assemble(kappa, enumerate_box(1), d.spec, d.params);
  const auto sd = eig_oracle(M);
  for (int i = 1; i < sd.eigenvalues.size(); ++i) CHECK(sd.eigenvalues[i] >= sd.eigenvalues[i - 1]);
  CHECK(sd.eigenvalues.sum() == doctest::Approx(M.H.trace().real()).epsilon(1e-12));
  const auto I = Eigen::MatrixXcd::Identity(M.H.rows(), M.H.cols());
  CHECK((sd.eigenvectors.adjoint() * sd.eigenvectors - I).cwiseAbs().maxCoeff() < 1e-12);

  const auto free = eig_oracle(assemble(kappa, enumerate_box(1), d.free, d.params), false);
  auto diag = free_diagonal(kappa, enumerate_box(1), d.params);
  std::sort(diag.begin(), diag.end());
  for (int i = 0; i < diag.size(); ++i) CHECK(free.eigenvalues[i] == doctest::Approx(diag[i]).epsilon(1e-14));

  CHECK(resolvent_gap(M, cplx{sd.eigenvalues[0] - 50.0, 0.0}) == doctest::Approx(50.0).epsilon(1e-10));
  CHECK(resolvent_gap(M, cplx{sd.eigenvalues[3], 0.0}) < 1e-9);
  CHECK(resolvent_gap(M, cplx{sd.eigenvalues[3], 0.5}) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(spectral_window(M, sd.eigenvalues[0], 1e-9).count >= 1);
  const double lo = sd.eigenvalues[0], hi = sd.eigenvalues[sd.eigenvalues.size() - 1];
  CHECK(spectral_window(M, 0.5 * (lo + hi), hi - lo + 1.0).count == static_cast<std::size_t>(M.H.rows()));
  CHECK(spectral_window(sd.eigenvalues, lo - 10.0, 1.0).count == 0);
  CHECK_THROWS_AS(eig_oracle(M, true, 4), DimensionCap);
}
