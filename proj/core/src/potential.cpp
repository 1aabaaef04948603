#include "qp/potential.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qp/errors.hpp"

namespace qp {

double PotentialSpec::l1_norm() const {
  double s = 0.0;
  for (const auto& [q, v] : nonzero_) s += std::abs(v);
  return s;
}

int PotentialSpec::max_support_norm() const {
  int n = 0;
  for (const auto& [q, v] : nonzero_) n = std::max(n, triple_norm(q));
  return n;
}

PotentialSpec build(const std::vector<std::pair<LatticeIndex, cplx>>& generators, int Q, const QPParams& params) {
  if (Q < 1) throw ConfigError("Q must be a positive integer");
  PotentialSpec spec;
  spec.Q = Q;
  spec.generators = generators;

  for (const auto& [g, v] : generators) {
    if (g.is_zero()) throw ConfigError("zero generator: V_0 is fixed to 0");
    if (triple_norm(g) > Q) {
      std::ostringstream os;
      os << "generator " << to_string(g) << " has norm " << triple_norm(g) << " > Q=" << Q;
      throw NormViolation(os.str());
    }
  }
  // Colinear directions must be rational multiples of each other.
  for (std::size_t i = 0; i < generators.size(); ++i)
    for (std::size_t j = i + 1; j < generators.size(); ++j) {
      const auto& a = generators[i].first;
      const auto& b = generators[j].first;
      if (dual_colinear(a, b, params) && !integer_parallel(a, b)) {
        throw ColinearityViolation("generators " + to_string(a) + " and " + to_string(b) +
                                   " are colinear with irrational ratio");
      }
    }

  for (const auto& [g, v] : generators) {
    const LatticeIndex d = primitive_direction(g);
    for (int n = 1; triple_norm(n * d) <= Q; ++n) {
      spec.coeffs.emplace(n * d, cplx{});
      spec.coeffs.emplace(-(n * d), cplx{});
    }
  }
  for (const auto& [g, v] : generators) {
    spec.coeffs[g] = v;
    spec.coeffs[-g] = std::conj(v);
  }
  for (const auto& [q, v] : spec.coeffs)
    if (v != cplx{}) spec.nonzero_.emplace_back(q, v);
  return spec;
}

PotentialSpec rebuild(const PotentialSpec& spec, const QPParams& params) {
  std::vector<std::pair<LatticeIndex, cplx>> gens;
  for (const auto& [q, v] : spec.coeffs)
    if (LatticeIndex{} < q) gens.emplace_back(q, v);
  return build(gens, spec.Q, params);
}

cplx coefficient(const PotentialSpec& spec, const LatticeIndex& q) {
  auto it = spec.coeffs.find(q);
  return it == spec.coeffs.end() ? cplx{} : it->second;
}

cplx evaluate_complex(const PotentialSpec& spec, const Vec2& x, const QPParams& params) {
  cplx s{};
  for (const auto& [q, v] : spec.nonzero()) {
    const double phase = dual_vector(q, params).p.dot(x);
    s += v * std::polar(1.0, phase);
  }
  return s;
}

double evaluate(const PotentialSpec& spec, const Vec2& x, const QPParams& params) {
  return evaluate_complex(spec, x, params).real();
}

DirectionalSublattice directional_sublattice(const PotentialSpec& spec, const LatticeIndex& q,
                                             const QPParams& params) {
  if (q.is_zero() || !spec.in_SQ(q)) throw NotInSQ(to_string(q) + " is not in S_Q");
  DirectionalSublattice out;
  out.generator = primitive_direction(q);
  out.p_q = dual_vector(out.generator, params).length();
  for (int n = -spec.Q; n <= spec.Q; ++n)
    if (n != 0 && spec.in_SQ(n * out.generator)) out.multiples.push_back(n);
  return out;
}

}  // namespace qp
