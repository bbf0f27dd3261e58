#pragma once

// Two-component re-expression of a state and the additivity constraint it
// induces on a rule.

#include <optional>

#include "qlab/noncontextuality.hpp"
#include "qlab/random.hpp"

namespace qlab {

/// Context whose first vector is b_k and whose second is the normalized
/// remainder (Σ_{i≠k} c_i b_i)/|c′|, padded by orthonormal_complete. In it,
/// ψ has exactly two nonzero amplitudes.
inline OrthonormalBasis collapse_to_two(const StateVector& psi, const OrthonormalBasis& basis,
                                        std::size_t k, const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "collapse_to_two");
  if (k >= basis.dim()) throw DimensionError("collapse_to_two: index out of range");
  const CVector c = amplitudes(psi, basis);
  const auto kk = detail::to_index(k);
  if (std::abs(c[kk]) >= 1.0 - tol.norm) {
    throw DegenerateCollapseError("collapse_to_two: state lies along b_k, complement is empty");
  }
  CVector rest = CVector::Zero(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (i != kk) rest += c[i] * basis.matrix().col(i);
  }
  const CVector seeds[] = {basis.matrix().col(kk), rest / rest.norm()};
  return orthonormal_complete(std::span<const CVector>(seeds), basis.dim(), tol);
}

/// |p_B′(remainder) − Σ_{i≠k} p_B(b_i)| with B′ = collapse_to_two(ψ, B, k).
inline double additivity_witness(const FrameRule& rule, const StateVector& psi,
                                 const OrthonormalBasis& basis, std::size_t k,
                                 const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "additivity_witness");
  if (basis.dim() < 3) throw InsufficientSupportError("additivity_witness: dim must be >= 3");
  const CVector c = amplitudes(psi, basis);
  std::size_t support = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) support += std::abs(c[i]) > tol.norm ? 1 : 0;
  if (support < 3) throw InsufficientSupportError("additivity_witness: fewer than 3 nonzero amplitudes");

  const auto p = evaluate(rule, psi, basis, tol);
  const auto q = evaluate(rule, psi, collapse_to_two(psi, basis, k, tol), tol);
  double parts = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != k) parts += p[i];
  }
  return std::abs(q[1] - parts);
}

struct ViolationSearch {
  std::optional<ContextPair> pair;
  double gap = 0.0;
};

/// Looks for a context sharing an outcome with `basis` in which `rule`
/// assigns that outcome a different probability. Tries every collapse
/// context, then `random_tries` Haar-random rotations of each complement.
inline ViolationSearch find_np_violation(const FrameRule& rule, const StateVector& psi,
                                         const OrthonormalBasis& basis, std::uint64_t seed,
                                         std::size_t random_tries = 8,
                                         const Tolerances& tol = kDefaultTolerances) {
  ViolationSearch best;
  const auto consider = [&](OrthonormalBasis other, std::size_t k) {
    ContextPair pair(basis, std::move(other), {{k, 0}}, tol);
    const double gap = np_violation(rule, psi, pair, tol);
    if (!best.pair || gap > best.gap) {
      best.gap = gap;
      best.pair = std::move(pair);
    }
  };
  const CVector c = amplitudes(psi, basis);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    if (std::abs(c[detail::to_index(k)]) < 1.0 - tol.norm) consider(collapse_to_two(psi, basis, k, tol), k);
  }
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    for (std::size_t t = 0; t < random_tries; ++t) {
      consider(random_sharing_basis(basis, k, derive_seed(seed, k * random_tries + t)), k);
    }
  }
  return best;
}

}  // namespace qlab
