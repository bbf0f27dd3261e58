#pragma once

// Ancilla fine-graining of a two-outcome state with weights (m/N, (N−m)/N)
// into N equal-weight branches, and the counting argument it supports.

#include "qlab/frame_rules.hpp"
#include "qlab/rational.hpp"

namespace qlab {

inline constexpr std::uint64_t kMaxFineGrainLabels = 1u << 16;

/// Joint state of system (dim 2) ⊗ ancilla (dim N):
///   √(m/N) |a_1⟩|C_1⟩ + √((N−m)/N) |a_2⟩|C_2⟩
/// with C_1 = Σ_{j<m} |j⟩/√m and C_2 = Σ_{j≥m} |j⟩/√(N−m). In the fine
/// pointer basis {|j⟩} every branch |a_o(j)⟩|j⟩ has weight 1/N.
struct FineGrainPlan {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::vector<std::size_t> branch_map;  // fine label j -> outcome (0 or 1)
  std::vector<Rational> branch_weights; // exact squared modulus per fine label
  StateVector joint;                    // over ProductSpace(2, N)
  CVector coarse_pointer_1;
  CVector coarse_pointer_2;

  ProductSpace space() const { return ProductSpace(2, static_cast<std::size_t>(n)); }

  /// Exact coarse weights (Σ over labels mapped to each outcome).
  std::pair<Rational, Rational> coarse_weights() const {
    Rational w[2] = {Rational(0), Rational(0)};
    for (std::size_t j = 0; j < branch_map.size(); ++j) w[branch_map[j]] += branch_weights[j];
    return {w[0], w[1]};
  }

  /// Pointer context {C_1, C_2, …} completed in C^N.
  OrthonormalBasis coarse_pointer_basis() const {
    const CVector seeds[] = {coarse_pointer_1, coarse_pointer_2};
    return orthonormal_complete(std::span<const CVector>(seeds), static_cast<std::size_t>(n));
  }
};

/// Labels 0..m−1 go to outcome 0, the rest to outcome 1.
inline FineGrainPlan fine_grain(std::uint64_t m, std::uint64_t n) {
  if (n > kMaxFineGrainLabels) throw DomainError("fine_grain: N exceeds 2^16");
  if (m == 0 || m >= n) throw DomainError("fine_grain: need 0 < m < N");

  const auto labels = static_cast<Eigen::Index>(n);
  const auto first = static_cast<Eigen::Index>(m);
  CVector c1 = CVector::Zero(labels);
  CVector c2 = CVector::Zero(labels);
  c1.head(first).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  c2.tail(labels - first).setConstant(1.0 / std::sqrt(static_cast<double>(n - m)));

  const double w1 = static_cast<double>(m) / static_cast<double>(n);
  CVector joint(2 * labels);
  joint.head(labels) = std::sqrt(w1) * c1;
  joint.tail(labels) = std::sqrt(1.0 - w1) * c2;

  FineGrainPlan plan{m, n, {}, {}, StateVector::normalized(std::move(joint)), std::move(c1), std::move(c2)};
  plan.branch_map.resize(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < plan.branch_map.size(); ++j) plan.branch_map[j] = j < m ? 0 : 1;
  // |√(w_o) · 1/√(size_o)|² = w_o / size_o, evaluated exactly
  const Rational coarse[2] = {Rational(BigInt(m), BigInt(n)), Rational(BigInt(n - m), BigInt(n))};
  const std::uint64_t sizes[2] = {m, n - m};
  plan.branch_weights.reserve(static_cast<std::size_t>(n));
  for (std::size_t o : plan.branch_map) {
    plan.branch_weights.push_back(coarse[o] * Rational(BigInt(1), BigInt(sizes[o])));
  }
  return plan;
}

/// Probability of system outcome `outcome` in the context
/// {system_i ⊗ pointer_j}, summed over all pointer labels j.
inline double outcome_probability(const FrameRule& rule, const StateVector& joint,
                                  const OrthonormalBasis& system, const OrthonormalBasis& pointers,
                                  std::size_t outcome, const Tolerances& tol = kDefaultTolerances) {
  const std::size_t labels = pointers.dim();
  if (outcome >= system.dim()) throw DimensionError("outcome_probability: outcome out of range");
  const auto p = evaluate(rule, joint, tensor_basis(system, pointers), tol);
  double total = 0.0;
  for (std::size_t j = 0; j < labels; ++j) total += p[outcome * labels + j];
  return total;
}

/// |p(a_1; coarse pointers) − p(a_1; fine pointers)|
inline double fine_grain_invariance_residual(const FrameRule& rule, const FineGrainPlan& plan,
                                             const Tolerances& tol = kDefaultTolerances) {
  const auto fine = OrthonormalBasis::standard(static_cast<std::size_t>(plan.n));
  const auto system = OrthonormalBasis::standard(2);
  const double coarse_p = outcome_probability(rule, plan.joint, system, plan.coarse_pointer_basis(), 0, tol);
  const double fine_p = outcome_probability(rule, plan.joint, system, fine, 0, tol);
  return std::abs(coarse_p - fine_p);
}

/// m/N obtained by counting: the fine branches carry equal amplitudes, hence
/// (by phase and basis independence) equal probabilities, so outcome 0 gets
/// (number of its branches) × (1/N).
inline Rational rational_born(std::uint64_t m, std::uint64_t n) {
  const FineGrainPlan plan = fine_grain(m, n);
  const CVector& amp = plan.joint.components();
  const double expected = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < plan.branch_map.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(plan.branch_map[j] * n + j);
    if (std::abs(std::abs(amp[idx]) - expected) > 1e-12) {
      throw DomainError("rational_born: fine branches are not equal-amplitude");
    }
    if (plan.branch_weights[j] != plan.branch_weights.front()) {
      throw DomainError("rational_born: fine branch weights differ");
    }
  }
  std::uint64_t count = 0;
  for (std::size_t o : plan.branch_map) count += o == 0 ? 1 : 0;
  return Rational(BigInt(count), BigInt(1)) * plan.branch_weights.front();
}

}  // namespace qlab
