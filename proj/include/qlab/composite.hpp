#pragma once

// System ⊗ context constructions: pointer-correlated states, joint outcome
// distributions, perfect correlation, remote-context signalling and the
// ancilla extension of qubit states.

#include "qlab/fine_grain.hpp"
#include "qlab/noncontextuality.hpp"
#include "qlab/schmidt.hpp"

namespace qlab {

/// Σ_i c_i |b_i⟩|C_i⟩ with c_i = ⟨b_i|ψ⟩ and orthonormal pointers C_i ∈ C^M.
struct ContextualState {
  OrthonormalBasis system_basis;
  OrthonormalBasis pointer_basis;  // columns 0..N−1 are the pointers C_i
  CVector coefficients;
  StateVector joint;

  std::size_t system_dim() const { return system_basis.dim(); }
  std::size_t pointer_dim() const { return pointer_basis.dim(); }
  ProductSpace space() const { return ProductSpace(system_dim(), pointer_dim()); }

  /// Product context {b_i ⊗ P_j} over the completed pointer basis.
  OrthonormalBasis joint_context() const { return tensor_basis(system_basis, pointer_basis); }

  /// Column of b_i ⊗ C_i in joint_context().
  std::size_t correlated_index(std::size_t i) const { return i * pointer_dim() + i; }

  /// ‖joint − Σ_i c_i b_i ⊗ C_i‖
  double reconstruction_error() const {
    CVector sum = CVector::Zero(joint.components().size());
    for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
      sum += coefficients[i] * kron(system_basis.matrix().col(i), pointer_basis.matrix().col(i));
    }
    return (joint.components() - sum).norm();
  }
};

/// `pointers` holds one orthonormal column per outcome of `basis`.
inline ContextualState attach_context(const StateVector& psi, const OrthonormalBasis& basis,
                                      const CMatrix& pointers,
                                      const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "attach_context");
  if (static_cast<std::size_t>(pointers.cols()) != basis.dim()) {
    throw DimensionError("attach_context: need one pointer per outcome");
  }
  if (pointers.rows() < pointers.cols()) {
    throw DimensionError("attach_context: pointer space smaller than system");
  }
  if (OrthonormalBasis::orthonormality_defect(pointers) > tol.ortho) {
    throw RankDeficiencyError("attach_context: pointers are not orthonormal");
  }
  std::vector<CVector> seeds;
  for (Eigen::Index i = 0; i < pointers.cols(); ++i) seeds.emplace_back(pointers.col(i));
  OrthonormalBasis pointer_basis =
      orthonormal_complete(std::span<const CVector>(seeds), static_cast<std::size_t>(pointers.rows()), tol);

  const CVector c = amplitudes(psi, basis);
  CVector joint = CVector::Zero(static_cast<Eigen::Index>(basis.dim()) * pointers.rows());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    joint += c[i] * kron(basis.matrix().col(i), pointer_basis.matrix().col(i));
  }
  return ContextualState{basis, std::move(pointer_basis), c, StateVector::normalized(std::move(joint), tol)};
}

inline ContextualState attach_context(const StateVector& psi, const OrthonormalBasis& basis,
                                      const OrthonormalBasis& pointers,
                                      const Tolerances& tol = kDefaultTolerances) {
  return attach_context(psi, basis, pointers.matrix().leftCols(detail::to_index(basis.dim())), tol);
}

/// Entry (i, k) = rule probability of a_i ⊗ b_k in the product context.
inline Eigen::MatrixXd joint_distribution(const FrameRule& rule, const StateVector& joint,
                                          const OrthonormalBasis& left, const OrthonormalBasis& right,
                                          const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(joint.dim(), left.dim() * right.dim(), "joint_distribution");
  const auto p = evaluate(rule, joint, tensor_basis(left, right), tol);
  const auto n = detail::to_index(left.dim());
  const auto m = detail::to_index(right.dim());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) out(i, k) = p[static_cast<std::size_t>(i * m + k)];
  }
  return out;
}

/// max off-diagonal probability + max_i |row_i − column_i|, for a joint state
/// that is diagonal in {a_i ⊗ b_k}.
inline double perfect_correlation_residual(const FrameRule& rule, const StateVector& joint,
                                           const OrthonormalBasis& left, const OrthonormalBasis& right,
                                           const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(joint.dim(), left.dim() * right.dim(), "perfect_correlation_residual");
  const CVector amp = amplitudes(joint, tensor_basis(left, right));
  const auto n = detail::to_index(left.dim());
  const auto m = detail::to_index(right.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (i != k && std::abs(amp[i * m + k]) > tol.ortho) {
        throw SchmidtFormError("perfect_correlation_residual: state is not biorthogonal in these bases");
      }
    }
  }
  const Eigen::MatrixXd p = joint_distribution(rule, joint, left, right, tol);
  double off = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (i != k) off = std::max(off, p(i, k));
    }
  }
  const Eigen::VectorXd rows = p.rowwise().sum();
  const Eigen::VectorXd cols = p.colwise().sum().transpose();
  double marginal = 0.0;
  for (Eigen::Index i = 0; i < std::max(n, m); ++i) {
    const double r = i < n ? rows[i] : 0.0;
    const double c = i < m ? cols[i] : 0.0;
    marginal = std::max(marginal, std::abs(r - c));
  }
  return off + marginal;
}

/// One experimental arrangement: the measured context and its pointer states.
struct MeasurementContext {
  OrthonormalBasis basis;
  OrthonormalBasis pointers;  // first basis.dim() columns are used
  std::string label;
};

struct SignallingReport {
  double p_a = 0.0;
  double p_a_prime = 0.0;
  double gap = 0.0;
  std::string label_a;
  std::string label_a_prime;
};

/// Probability of the shared outcome (together with its pointer) under each
/// arrangement; a nonzero gap means the remote choice changes the local
/// marginal.
inline SignallingReport signalling_magnitude(const FrameRule& rule, const StateVector& psi,
                                             const MeasurementContext& a, const MeasurementContext& a_prime,
                                             std::pair<std::size_t, std::size_t> shared,
                                             const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(a.basis.dim(), a_prime.basis.dim(), "signalling_magnitude");
  const auto [i, j] = shared;
  if (i >= a.basis.dim() || j >= a_prime.basis.dim() ||
      !detail::same_ray(a.basis.matrix().col(detail::to_index(i)),
                        a_prime.basis.matrix().col(detail::to_index(j)), tol.ortho)) {
    throw EmptySharedSetError("signalling_magnitude: contexts do not share the outcome");
  }
  const auto state_a = attach_context(psi, a.basis, a.pointers, tol);
  const auto state_b = attach_context(psi, a_prime.basis, a_prime.pointers, tol);
  SignallingReport out;
  out.p_a = evaluate(rule, state_a.joint, state_a.joint_context(), tol)[state_a.correlated_index(i)];
  out.p_a_prime = evaluate(rule, state_b.joint, state_b.joint_context(), tol)[state_b.correlated_index(j)];
  out.gap = std::abs(out.p_a - out.p_a_prime);
  out.label_a = a.label;
  out.label_a_prime = a_prime.label;
  return out;
}

/// Qubit ⊗ three-level ancilla: c_1|a_1⟩|C′_1⟩ + c′_2|a_2⟩|C′_2⟩ + c′_3|a_2⟩|C′_3⟩.
struct AncillaExtension {
  OrthonormalBasis system_basis;
  OrthonormalBasis pointer_basis;
  StateVector joint;

  ProductSpace space() const { return ProductSpace(2, 3); }
  double outcome_probability(const FrameRule& rule, std::size_t outcome,
                             const Tolerances& tol = kDefaultTolerances) const {
    return qlab::outcome_probability(rule, joint, system_basis, pointer_basis, outcome, tol);
  }
};

/// Splits the a_2 branch of a qubit state across two pointer states; requires
/// |c′_2|² + |c′_3|² = |c_2|².
inline AncillaExtension extend_dim2(const StateVector& psi, Complex split_2, Complex split_3,
                                    const OrthonormalBasis& basis = OrthonormalBasis::standard(2),
                                    const Tolerances& tol = kDefaultTolerances) {
  if (psi.dim() != 2 || basis.dim() != 2) throw DimensionError("extend_dim2: qubit state required");
  const CVector c = amplitudes(psi, basis);
  if (std::abs(std::norm(split_2) + std::norm(split_3) - std::norm(c[1])) > tol.norm) {
    throw SplitConstraintError("extend_dim2: split weights do not add up to |c_2|^2");
  }
  auto pointers = OrthonormalBasis::standard(3);
  CVector joint = c[0] * kron(basis.matrix().col(0), pointers.matrix().col(0)) +
                  split_2 * kron(basis.matrix().col(1), pointers.matrix().col(1)) +
                  split_3 * kron(basis.matrix().col(1), pointers.matrix().col(2));
  return AncillaExtension{basis, std::move(pointers), StateVector::normalized(std::move(joint), tol)};
}

}  // namespace qlab
