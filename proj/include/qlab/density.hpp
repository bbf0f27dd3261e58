#pragma once

// Least-squares trace-rule fit: find the density matrix ρ with
// tr(ρ |v⟩⟨v|) ≈ p over a set of (outcome, probability) samples.

#include <Eigen/Eigenvalues>

#include "qlab/state.hpp"

namespace qlab {

struct DensitySample {
  StateVector outcome;
  double probability;
};

struct DensityFit {
  CMatrix rho;
  double residual = 0.0;  // RMS of ⟨v|ρ|v⟩ − p after PSD projection
  bool psd_clipped = false;
};

namespace detail {

/// Coordinates of ⟨v|H_m|v⟩ for the Hilbert–Schmidt orthonormal basis of
/// Hermitian matrices: E_jj, then (E_jk + E_kj)/√2 and i(E_jk − E_kj)/√2.
inline Eigen::VectorXd hermitian_features(const CVector& v) {
  const Eigen::Index d = v.size();
  Eigen::VectorXd f(d * d);
  Eigen::Index m = 0;
  for (Eigen::Index j = 0; j < d; ++j) f[m++] = std::norm(v[j]);
  const double s = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      const Complex z = std::conj(v[j]) * v[k];
      f[m++] = s * z.real();
      f[m++] = -s * z.imag();
    }
  }
  return f;
}

inline CMatrix hermitian_from_coordinates(const Eigen::VectorXd& x, Eigen::Index d) {
  CMatrix h = CMatrix::Zero(d, d);
  Eigen::Index m = 0;
  for (Eigen::Index j = 0; j < d; ++j) h(j, j) = x[m++];
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      const double sym = x[m++];
      const double anti = x[m++];
      h(j, k) = Complex(sym * r, anti * r);
      h(k, j) = std::conj(h(j, k));
    }
  }
  return h;
}

}  // namespace detail

/// Fit over Hermitian trace-1 matrices, then eigenvalue-clip to PSD and
/// renormalize the trace.
inline DensityFit reconstruct_density(const std::vector<DensitySample>& samples,
                                      const Tolerances& tol = kDefaultTolerances) {
  if (samples.empty()) throw SpanDeficiencyError("reconstruct_density: no samples");
  const std::size_t dim = samples.front().outcome.dim();
  const auto d = detail::to_index(dim);
  const Eigen::Index params = d * d;
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < params) throw SpanDeficiencyError("reconstruct_density: fewer than dim^2 samples");

  Eigen::MatrixXd a(n, params);
  Eigen::VectorXd p(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& sample = samples[static_cast<std::size_t>(s)];
    detail::require_same_dim(sample.outcome.dim(), dim, "reconstruct_density");
    a.row(s) = detail::hermitian_features(sample.outcome.components()).transpose();
    p[s] = sample.probability;
  }

  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram);
  const double top = std::max(1.0, gram_eig.eigenvalues().maxCoeff());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < params; ++i) rank += gram_eig.eigenvalues()[i] > tol.rank * top ? 1 : 0;
  if (rank < params) throw SpanDeficiencyError("reconstruct_density: projectors do not span");

  // KKT system for min ‖a x − p‖² subject to tr = 1.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(params + 1, params + 1);
  kkt.topLeftCorner(params, params) = gram;
  Eigen::VectorXd rhs(params + 1);
  rhs.head(params) = a.transpose() * p;
  rhs[params] = 1.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    kkt(j, params) = 1.0;
    kkt(params, j) = 1.0;
  }
  const Eigen::VectorXd x = kkt.colPivHouseholderQr().solve(rhs).head(params);

  DensityFit fit;
  CMatrix rho = detail::hermitian_from_coordinates(x, d);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lambda[i] < -tol.norm) fit.psd_clipped = true;
    if (lambda[i] < 0.0) lambda[i] = 0.0;
  }
  lambda /= lambda.sum();
  rho = eig.eigenvectors() * lambda.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  fit.rho = 0.5 * (rho + rho.adjoint());

  double sq = 0.0;
  for (const auto& sample : samples) {
    const CVector& v = sample.outcome.components();
    const double predicted = v.dot(fit.rho * v).real();
    sq += (predicted - sample.probability) * (predicted - sample.probability);
  }
  fit.residual = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

inline CMatrix projector(const StateVector& psi) {
  return psi.components() * psi.components().adjoint();
}

}  // namespace qlab
