#pragma once

#include <algorithm>
#include <numeric>

#include "qlab/state.hpp"

namespace qlab {

/// ψ = Σ_j coefficients[j] · left.col(j) ⊗ right.col(j)
struct SchmidtForm {
  std::vector<double> coefficients;  // non-increasing, strictly positive
  CMatrix left;                      // N × r, orthonormal columns
  CMatrix right;                     // M × r, orthonormal columns

  std::size_t rank() const noexcept { return coefficients.size(); }

  CVector reconstruct() const {
    CVector out = CVector::Zero(left.rows() * right.rows());
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
      const auto c = detail::to_index(j);
      out += coefficients[j] * kron(left.col(c), right.col(c));
    }
    return out;
  }
};

/// Singular value decomposition of the N×M amplitude array. Coefficients
/// below the norm tolerance are dropped. Each left vector is rephased so its
/// first nonzero component is real positive; equal coefficients are ordered
/// by the index of that component.
inline SchmidtForm schmidt_decompose(const StateVector& psi, const ProductSpace& space,
                                     const Tolerances& tol = kDefaultTolerances) {
  if (space.factor_count() != 2) throw DimensionError("schmidt_decompose: two factors required");
  detail::require_same_dim(psi.dim(), space.total_dim(), "schmidt_decompose");
  const auto n = detail::to_index(space.factor_dims()[0]);
  const auto m = detail::to_index(space.factor_dims()[1]);

  CMatrix amp(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) amp(i, k) = psi.components()[i * m + k];
  }
  Eigen::JacobiSVD<CMatrix> svd(amp, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const CMatrix& u = svd.matrixU();
  const CMatrix v_conj = svd.matrixV().conjugate();

  struct Term {
    double coefficient;
    Eigen::Index lead;
    Eigen::Index order;
    CVector l;
    CVector r;
  };
  std::vector<Term> terms;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s[j] <= tol.norm) continue;
    CVector l = u.col(j);
    CVector r = v_conj.col(j);
    Eigen::Index lead = 0;
    while (lead < n && std::abs(l[lead]) <= tol.norm) ++lead;
    if (lead < n) {
      const Complex phase = l[lead] / std::abs(l[lead]);
      l *= std::conj(phase);
      r *= phase;
    }
    terms.push_back({s[j], lead, j, std::move(l), std::move(r)});
  }
  std::stable_sort(terms.begin(), terms.end(), [&](const Term& a, const Term& b) {
    if (std::abs(a.coefficient - b.coefficient) > tol.norm) return a.coefficient > b.coefficient;
    if (a.lead != b.lead) return a.lead < b.lead;
    return a.order < b.order;
  });

  SchmidtForm out;
  const auto rank = static_cast<Eigen::Index>(terms.size());
  out.left.resize(n, rank);
  out.right.resize(m, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    out.coefficients.push_back(terms[j].coefficient);
    out.left.col(j) = terms[j].l;
    out.right.col(j) = terms[j].r;
  }
  return out;
}

}  // namespace qlab
