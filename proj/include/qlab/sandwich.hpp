#pragma once

// Bracketing an arbitrary weight |c_1|² = x between rational weights realized
// by explicit three-dimensional contexts:
//   lower context {a″}: a″_2 = a′_2, |⟨a″_1|ψ⟩|² = lo ≤ x
//   upper context {a‴}: a‴_1 = a_1,  |⟨a‴_2|ψ⟩|² = 1 − hi, so hi ≥ x
// For any frame rule obeying noncontextuality, lo ≤ p(a_1) ≤ hi.

#include "qlab/rational.hpp"
#include "qlab/state.hpp"

namespace qlab {

struct SandwichWitness {
  OrthonormalBasis basis;
  std::size_t outcome;  // index of the vector whose weight is claimed
  Rational claimed;     // exact claimed |⟨basis_outcome|ψ⟩|²
  double realized;      // the same weight recomputed from the vectors
};

struct SandwichResult {
  Rational target;
  Rational lo;
  Rational hi;
  unsigned digits;  // decimal truncation depth
  StateVector state;  // √x a_1 + √(1−x) a′_2 in C³, reference context = standard
  SandwichWitness lower;
  SandwichWitness upper;

  Rational width() const { return hi - lo; }

  /// Largest |realized − claimed| over both witnesses.
  double witness_error() const {
    return std::max(std::abs(lower.realized - lower.claimed.to_double()),
                    std::abs(upper.realized - upper.claimed.to_double()));
  }
};

namespace detail {

inline double sqrt_ratio(const Rational& num, const Rational& den) {
  if (den.is_zero()) return 0.0;
  return std::sqrt(std::clamp((num / den).to_double(), 0.0, 1.0));
}

}  // namespace detail

/// Decimal truncation at the smallest depth d with 10^-d ≤ epsilon. Targets
/// that are exact d-digit decimals return lo = hi = target.
inline SandwichResult continuity_sandwich(const Rational& target, double epsilon) {
  if (!(target > Rational(0)) || !(target < Rational(1))) {
    throw DomainError("continuity_sandwich: target must lie in (0,1)");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("continuity_sandwich: epsilon must be > 0");

  const Rational eps = Rational::from_double(epsilon);
  unsigned digits = 0;
  BigInt scale = 1;
  while (Rational(BigInt(1), scale) > eps) {
    scale *= 10;
    ++digits;
  }
  const Rational lo(( target * Rational(scale, 1)).floor(), scale);
  Rational hi = lo;
  if (lo != target) {
    hi = lo + Rational(BigInt(1), scale);
    if (hi > Rational(1)) hi = Rational(1);
  }

  const Rational complement = Rational(1) - target;
  const double c1 = std::sqrt(target.to_double());
  const double c2 = std::sqrt(complement.to_double());
  CVector psi(3);
  psi << c1, c2, 0.0;
  StateVector state = StateVector::normalized(psi);

  // lower: rotate a_1 toward a_3 so that x cos²θ = lo
  const double cos_t = detail::sqrt_ratio(lo, target);
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  CMatrix lower(3, 3);
  lower << cos_t, 0.0, -sin_t,
           0.0,   1.0, 0.0,
           sin_t, 0.0, cos_t;

  // upper: rotate a′_2 toward a_3 so that (1 − x) cos²φ = 1 − hi
  const double cos_f = detail::sqrt_ratio(Rational(1) - hi, complement);
  const double sin_f = std::sqrt(std::max(0.0, 1.0 - cos_f * cos_f));
  CMatrix upper(3, 3);
  upper << 1.0, 0.0,   0.0,
           0.0, cos_f, -sin_f,
           0.0, sin_f, cos_f;

  OrthonormalBasis lower_basis(std::move(lower));
  OrthonormalBasis upper_basis(std::move(upper));
  const double lower_weight = std::norm(amplitudes(state, lower_basis)[0]);
  const double upper_weight = std::norm(amplitudes(state, upper_basis)[1]);

  return SandwichResult{target,
                        lo,
                        hi,
                        digits,
                        std::move(state),
                        {std::move(lower_basis), 0, lo, lower_weight},
                        {std::move(upper_basis), 1, Rational(1) - hi, upper_weight}};
}

inline SandwichResult continuity_sandwich(double target, double epsilon) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("continuity_sandwich: target must lie in (0,1)");
  return continuity_sandwich(Rational::from_double(target), epsilon);
}

}  // namespace qlab
