#pragma once

// Measures of how far a rule departs from noncontextuality, the two Gleason
// frame postulates, and phase independence.

#include <utility>

#include "qlab/frame_rules.hpp"

namespace qlab {

/// Two contexts over the same space and the outcome pairs (i, i′) they share
/// up to phase.
class ContextPair {
 public:
  using Shared = std::vector<std::pair<std::size_t, std::size_t>>;

  ContextPair(OrthonormalBasis first, OrthonormalBasis second, Shared shared,
              const Tolerances& tol = kDefaultTolerances)
      : first_(std::move(first)), second_(std::move(second)), shared_(std::move(shared)) {
    detail::require_same_dim(first_.dim(), second_.dim(), "ContextPair");
    for (const auto& [i, j] : shared_) {
      if (i >= first_.dim() || j >= second_.dim()) throw DimensionError("ContextPair: index out of range");
      if (!detail::same_ray(first_.matrix().col(detail::to_index(i)),
                            second_.matrix().col(detail::to_index(j)), tol.ortho)) {
        throw EmptySharedSetError("ContextPair: listed pair is not a shared vector");
      }
    }
  }

  /// Pairs every vector of `first` with any vector of `second` on the same ray.
  static ContextPair detect(OrthonormalBasis first, OrthonormalBasis second,
                            const Tolerances& tol = kDefaultTolerances) {
    detail::require_same_dim(first.dim(), second.dim(), "ContextPair::detect");
    Shared shared;
    for (std::size_t i = 0; i < first.dim(); ++i) {
      for (std::size_t j = 0; j < second.dim(); ++j) {
        if (detail::same_ray(first.matrix().col(detail::to_index(i)),
                             second.matrix().col(detail::to_index(j)), tol.ortho)) {
          shared.emplace_back(i, j);
        }
      }
    }
    return ContextPair(std::move(first), std::move(second), std::move(shared), tol);
  }

  const OrthonormalBasis& first() const noexcept { return first_; }
  const OrthonormalBasis& second() const noexcept { return second_; }
  const Shared& shared() const noexcept { return shared_; }

 private:
  OrthonormalBasis first_;
  OrthonormalBasis second_;
  Shared shared_;
};

/// max over shared (i, i′) of |p_B(i) − p_B′(i′)|
inline double np_violation(const FrameRule& rule, const StateVector& psi, const ContextPair& pair,
                           const Tolerances& tol = kDefaultTolerances) {
  if (pair.shared().empty()) throw EmptySharedSetError("np_violation: no shared outcome");
  const auto p = evaluate(rule, psi, pair.first(), tol);
  const auto q = evaluate(rule, psi, pair.second(), tol);
  double worst = 0.0;
  for (const auto& [i, j] : pair.shared()) worst = std::max(worst, std::abs(p[i] - q[j]));
  return worst;
}

using Grouping = std::vector<std::vector<std::size_t>>;

struct PostulateResiduals {
  double normalization = 0.0;  // |Σ_i p_i − 1|
  double additivity = 0.0;     // max_g |p_merged(g) − Σ_{i∈g} p_i|
};

inline void validate_grouping(const Grouping& grouping, std::size_t dim) {
  std::vector<bool> seen(dim, false);
  std::size_t count = 0;
  for (const auto& group : grouping) {
    if (group.empty()) throw PartitionError("grouping: empty group");
    for (std::size_t i : group) {
      if (i >= dim) throw PartitionError("grouping: index out of range");
      if (seen[i]) throw PartitionError("grouping: index listed twice");
      seen[i] = true;
      ++count;
    }
  }
  if (count != dim) throw PartitionError("grouping: indices not covered");
}

/// Coarse-grained context: one vector per group, the normalized projection of
/// ψ onto span{b_i : i ∈ g} (or b_first(g) when ψ is orthogonal to the span),
/// completed to a full basis. Column g belongs to group g.
inline OrthonormalBasis merged_context(const StateVector& psi, const OrthonormalBasis& basis,
                                       const Grouping& grouping,
                                       const Tolerances& tol = kDefaultTolerances) {
  validate_grouping(grouping, basis.dim());
  const CVector c = amplitudes(psi, basis);
  std::vector<CVector> seeds;
  for (const auto& group : grouping) {
    CVector proj = CVector::Zero(c.size());
    for (std::size_t i : group) proj += c[detail::to_index(i)] * basis.matrix().col(detail::to_index(i));
    const double n = proj.norm();
    seeds.push_back(n > tol.norm ? CVector(proj / n)
                                 : CVector(basis.matrix().col(detail::to_index(group.front()))));
  }
  return orthonormal_complete(std::span<const CVector>(seeds), basis.dim(), tol);
}

inline PostulateResiduals gleason_postulate_check(const FrameRule& rule, const StateVector& psi,
                                                  const OrthonormalBasis& basis,
                                                  const Grouping& grouping,
                                                  const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "gleason_postulate_check");
  validate_grouping(grouping, basis.dim());
  const auto p = evaluate(rule, psi, basis, tol);
  PostulateResiduals out;
  double total = 0.0;
  for (double x : p) total += x;
  out.normalization = std::abs(total - 1.0);

  const auto merged = evaluate(rule, psi, merged_context(psi, basis, grouping, tol), tol);
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    double parts = 0.0;
    for (std::size_t i : grouping[g]) parts += p[i];
    out.additivity = std::max(out.additivity, std::abs(merged[g] - parts));
  }
  return out;
}

/// ψ with the phase of c_k (in `basis`) replaced by `new_phase`; moduli kept.
inline StateVector rephase_amplitude(const StateVector& psi, const OrthonormalBasis& basis,
                                     std::size_t k, double new_phase) {
  CVector c = amplitudes(psi, basis);
  if (k >= basis.dim()) throw DimensionError("rephase_amplitude: index out of range");
  const auto idx = detail::to_index(k);
  c[idx] = std::polar(std::abs(c[idx]), new_phase);
  return StateVector::normalized(synthesize(c, basis));
}

/// max_i |p(ψ)_i − p(ψ*)_i| where ψ* differs from ψ only in the phase of c_k.
/// Zero when c_k = 0, whose phase is undefined.
inline double phase_invariance_residual(const FrameRule& rule, const StateVector& psi,
                                        const OrthonormalBasis& basis, std::size_t k,
                                        double new_phase,
                                        const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "phase_invariance_residual");
  if (k >= basis.dim()) throw DimensionError("phase_invariance_residual: index out of range");
  const CVector c = amplitudes(psi, basis);
  if (std::abs(c[detail::to_index(k)]) == 0.0) return 0.0;
  const auto before = evaluate(rule, psi, basis, tol);
  const auto after = evaluate(rule, rephase_amplitude(psi, basis, k, new_phase), basis, tol);
  double worst = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) worst = std::max(worst, std::abs(before[i] - after[i]));
  return worst;
}

}  // namespace qlab
