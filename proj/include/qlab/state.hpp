#pragma once

// Pure states, measurement contexts (orthonormal bases) and tensor products
// over finite-dimensional complex Hilbert spaces.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/tolerances.hpp"

namespace qlab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

namespace detail {

inline Eigen::Index to_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

inline bool all_finite(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace detail

/// Unit-norm amplitude vector. Validated at construction; never renormalized
/// silently.
class StateVector {
 public:
  explicit StateVector(CVector components, const Tolerances& tol = kDefaultTolerances)
      : v_(std::move(components)) {
    if (v_.size() < 1) throw DimensionError("StateVector: dimension must be >= 1");
    if (!detail::all_finite(v_)) throw NormalizationError("StateVector: non-finite amplitude");
    const double n = v_.norm();
    if (std::abs(n - 1.0) > tol.norm) {
      throw NormalizationError("StateVector: norm " + std::to_string(n) + " is not 1");
    }
  }

  /// Builds a state from raw amplitudes, dividing by the norm first.
  static StateVector normalized(CVector components, const Tolerances& tol = kDefaultTolerances) {
    if (components.size() < 1) throw DimensionError("StateVector: dimension must be >= 1");
    if (!detail::all_finite(components)) {
      throw NormalizationError("StateVector: non-finite amplitude");
    }
    const double n = components.norm();
    if (n == 0.0) throw NormalizationError("StateVector: zero vector cannot be normalized");
    components /= n;
    return StateVector(std::move(components), tol);
  }

  static StateVector basis_state(std::size_t dim, std::size_t index) {
    if (dim < 1 || index >= dim) throw DimensionError("basis_state: index out of range");
    CVector v = CVector::Zero(detail::to_index(dim));
    v[detail::to_index(index)] = 1.0;
    return StateVector(std::move(v));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }
  const CVector& components() const noexcept { return v_; }
  Complex operator[](std::size_t i) const { return v_[detail::to_index(i)]; }

 private:
  CVector v_;
};

/// Complete orthonormal family, stored as the columns of a unitary matrix.
class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(CMatrix columns, const Tolerances& tol = kDefaultTolerances)
      : m_(std::move(columns)) {
    if (m_.cols() < 1 || m_.rows() != m_.cols()) {
      throw DimensionError("OrthonormalBasis: need dim vectors of length dim");
    }
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      if (!detail::all_finite(m_.col(j))) throw NormalizationError("OrthonormalBasis: non-finite entry");
    }
    const double dev = orthonormality_defect(m_);
    if (dev > tol.ortho) {
      throw RankDeficiencyError("OrthonormalBasis: orthonormality defect " + std::to_string(dev));
    }
  }

  static OrthonormalBasis standard(std::size_t dim) {
    if (dim < 1) throw DimensionError("standard basis: dim must be >= 1");
    return OrthonormalBasis(CMatrix::Identity(detail::to_index(dim), detail::to_index(dim)));
  }

  /// max_{i,j} |⟨b_i|b_j⟩ − δ_ij|
  static double orthonormality_defect(const CMatrix& m) {
    const CMatrix gram = m.adjoint() * m;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
      for (Eigen::Index j = 0; j < gram.cols(); ++j) {
        const Complex target = (i == j) ? Complex(1.0) : Complex(0.0);
        worst = std::max(worst, std::abs(gram(i, j) - target));
      }
    }
    return worst;
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.cols()); }
  const CMatrix& matrix() const noexcept { return m_; }
  auto column(std::size_t i) const { return m_.col(detail::to_index(i)); }
  StateVector vector(std::size_t i) const {
    if (i >= dim()) throw DimensionError("OrthonormalBasis::vector: index out of range");
    return StateVector(m_.col(detail::to_index(i)));
  }

 private:
  CMatrix m_;
};

/// Tensor-product layout; row-major, leftmost factor slowest.
class ProductSpace {
 public:
  explicit ProductSpace(std::vector<std::size_t> factor_dims) : dims_(std::move(factor_dims)) {
    if (dims_.empty()) throw DimensionError("ProductSpace: no factors");
    for (auto d : dims_) {
      if (d < 1) throw DimensionError("ProductSpace: factor dimension must be >= 1");
    }
  }
  ProductSpace(std::size_t left, std::size_t right) : ProductSpace(std::vector<std::size_t>{left, right}) {}

  const std::vector<std::size_t>& factor_dims() const noexcept { return dims_; }
  std::size_t factor_count() const noexcept { return dims_.size(); }
  std::size_t total_dim() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
  }

  /// Joint index of (i, k) in a two-factor space.
  std::size_t index(std::size_t i, std::size_t k) const {
    if (dims_.size() != 2) throw DimensionError("ProductSpace::index: two factors required");
    return i * dims_[1] + k;
  }

 private:
  std::vector<std::size_t> dims_;
};

/// Σ conj(u_k)·v_k
inline Complex inner_product(const CVector& u, const CVector& v) {
  detail::require_same_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(v.size()),
                           "inner_product");
  return u.dot(v);  // Eigen conjugates the left operand
}

inline Complex inner_product(const StateVector& u, const StateVector& v) {
  return inner_product(u.components(), v.components());
}

/// c_i = ⟨b_i|ψ⟩
inline CVector amplitudes(const StateVector& psi, const OrthonormalBasis& basis) {
  detail::require_same_dim(psi.dim(), basis.dim(), "amplitudes");
  return basis.matrix().adjoint() * psi.components();
}

/// Σ c_i b_i
inline CVector synthesize(const CVector& coefficients, const OrthonormalBasis& basis) {
  detail::require_same_dim(static_cast<std::size_t>(coefficients.size()), basis.dim(), "synthesize");
  return basis.matrix() * coefficients;
}

/// Extends the seeds to an orthonormal basis of C^dim by modified Gram–Schmidt
/// with one re-orthogonalization pass. The first vectors span the same flag as
/// the seeds; remaining slots are filled from the standard axes in index order,
/// skipping axes whose residual falls below the rank tolerance.
inline OrthonormalBasis orthonormal_complete(std::span<const CVector> seeds, std::size_t dim,
                                             const Tolerances& tol = kDefaultTolerances) {
  if (dim < 1) throw DimensionError("orthonormal_complete: dim must be >= 1");
  if (seeds.size() > dim) throw DimensionError("orthonormal_complete: more seeds than dimensions");

  const Eigen::Index n = detail::to_index(dim);
  CMatrix out(n, n);
  Eigen::Index filled = 0;

  auto residual_of = [&](CVector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < filled; ++j) v -= out.col(j) * out.col(j).dot(v);
    }
    return v;
  };

  for (const CVector& seed : seeds) {
    detail::require_same_dim(static_cast<std::size_t>(seed.size()), dim, "orthonormal_complete");
    const double scale = seed.norm();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw RankDeficiencyError("orthonormal_complete: zero or non-finite seed");
    }
    CVector r = residual_of(seed / scale);
    const double rn = r.norm();
    if (rn < tol.rank) throw RankDeficiencyError("orthonormal_complete: seeds are linearly dependent");
    out.col(filled++) = r / rn;
  }

  for (Eigen::Index axis = 0; axis < n && filled < n; ++axis) {
    CVector e = CVector::Zero(n);
    e[axis] = 1.0;
    CVector r = residual_of(std::move(e));
    const double rn = r.norm();
    if (rn < tol.rank) continue;
    out.col(filled++) = r / rn;
  }
  return OrthonormalBasis(std::move(out), tol);
}

inline OrthonormalBasis orthonormal_complete(const std::vector<StateVector>& seeds, std::size_t dim,
                                             const Tolerances& tol = kDefaultTolerances) {
  std::vector<CVector> raw;
  raw.reserve(seeds.size());
  for (const auto& s : seeds) raw.push_back(s.components());
  return orthonormal_complete(std::span<const CVector>(raw), dim, tol);
}

inline CVector kron(const CVector& u, const CVector& v) {
  CVector out(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out.segment(i * v.size(), v.size()) = u[i] * v;
  return out;
}

/// Component (i, k) is u_i·v_k at joint index i·M + k.
inline StateVector tensor_product(const StateVector& u, const StateVector& v) {
  return StateVector(kron(u.components(), v.components()));
}

/// Product context {a_i ⊗ b_k}, column i·M + k.
inline OrthonormalBasis tensor_basis(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  const Eigen::Index n = a.matrix().cols();
  const Eigen::Index m = b.matrix().cols();
  CMatrix out(n * m, n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) out.col(i * m + k) = kron(a.matrix().col(i), b.matrix().col(k));
  }
  return OrthonormalBasis(std::move(out));
}

}  // namespace qlab
