#pragma once

namespace qlab {

/// Numerical thresholds shared by every construction. Each operation takes
/// one of these by const reference, defaulted to the values below.
struct Tolerances {
  double norm = 1e-12;   // |‖ψ‖ − 1|
  double ortho = 1e-10;  // |⟨b_i|b_j⟩ − δ_ij|
  double rank = 1e-9;    // residual norm under which a vector counts as dependent
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace qlab
