#pragma once

// Candidate probability rules: functionals (state, context, outcome) -> [0,1].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "qlab/state.hpp"

namespace qlab {

namespace rules {

/// |⟨b_i|ψ⟩|²
struct Born {};

/// w_i = |c_i|^alpha, either divided by Σ_k w_k or clamped to [0,1].
struct PowerLaw {
  double alpha = 2.0;
  bool context_normalized = true;
};

/// Qubit-only hemisphere assignment: 1 when the outcome's Bloch vector points
/// into the open hemisphere around `axis`, 0 for the opposite one, 1/2 on the
/// boundary. Independent of the state.
struct Dim2Sector {
  std::array<double, 3> axis{0.0, 0.0, 1.0};
};

/// (Re c_i)², so it reacts to the phase of the amplitude.
struct PhaseSensitiveStub {};

/// Explicit probabilities for registered (state, basis, outcome) triples.
/// States match up to global phase; bases match column-wise up to phase.
struct UserTable {
  std::vector<StateVector> states;
  std::vector<OrthonormalBasis> bases;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> entries;
};

}  // namespace rules

using RuleKind = std::variant<rules::Born, rules::PowerLaw, rules::Dim2Sector,
                              rules::PhaseSensitiveStub, rules::UserTable>;

class FrameRule {
 public:
  FrameRule(RuleKind kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {
    if (const auto* p = std::get_if<rules::PowerLaw>(&kind_)) {
      if (!std::isfinite(p->alpha) || p->alpha <= 0.0) {
        throw RuleRegistrationError("PowerLaw: alpha must be finite and positive");
      }
    }
    if (auto* s = std::get_if<rules::Dim2Sector>(&kind_)) {
      const double n = std::hypot(s->axis[0], s->axis[1], s->axis[2]);
      if (!std::isfinite(n) || n == 0.0) throw RuleRegistrationError("Dim2Sector: zero axis");
      for (double& a : s->axis) a /= n;
    }
    if (const auto* t = std::get_if<rules::UserTable>(&kind_)) {
      for (const auto& [key, value] : t->entries) {
        if (!(value >= 0.0 && value <= 1.0)) throw RuleRegistrationError("UserTable: entry outside [0,1]");
        if (std::get<0>(key) >= t->states.size() || std::get<1>(key) >= t->bases.size()) {
          throw RuleRegistrationError("UserTable: entry refers to an unregistered id");
        }
      }
    }
  }

  static FrameRule born() { return {rules::Born{}, "born"}; }
  static FrameRule power_law(double alpha, bool context_normalized = true) {
    std::string name = "power:" + format_alpha(alpha) + (context_normalized ? "" : ":raw");
    return {rules::PowerLaw{alpha, context_normalized}, std::move(name)};
  }
  static FrameRule dim2_sector(std::array<double, 3> axis = {0.0, 0.0, 1.0}) {
    return {rules::Dim2Sector{axis}, "dim2sector"};
  }
  static FrameRule phase_sensitive_stub() { return {rules::PhaseSensitiveStub{}, "stub"}; }
  static FrameRule user_table(rules::UserTable table, std::string name = "table") {
    return {std::move(table), std::move(name)};
  }

  const RuleKind& kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  /// True when every context's outputs sum to 1 by construction.
  bool context_normalized() const {
    if (std::holds_alternative<rules::Born>(kind_)) return true;
    if (const auto* p = std::get_if<rules::PowerLaw>(&kind_)) return p->context_normalized;
    return false;
  }

  static std::string format_alpha(double alpha) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", alpha);
    return buf;
  }

 private:
  RuleKind kind_;
  std::string name_;
};

/// Bloch vector (x, y, z) of a qubit state vector.
inline std::array<double, 3> bloch_vector(const CVector& v) {
  const Complex a = v[0];
  const Complex b = v[1];
  const Complex cross = std::conj(a) * b;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(a) - std::norm(b)};
}

namespace detail {

inline bool same_ray(const CVector& u, const CVector& v, double tol) {
  return u.size() == v.size() && 1.0 - std::abs(u.dot(v)) <= tol;
}

inline std::vector<double> evaluate_table(const rules::UserTable& table, const StateVector& psi,
                                          const OrthonormalBasis& basis, const Tolerances& tol) {
  std::optional<std::size_t> state_id;
  for (std::size_t s = 0; s < table.states.size() && !state_id; ++s) {
    if (same_ray(table.states[s].components(), psi.components(), tol.ortho)) state_id = s;
  }
  std::optional<std::size_t> basis_id;
  for (std::size_t b = 0; b < table.bases.size() && !basis_id; ++b) {
    const auto& cand = table.bases[b];
    if (cand.dim() != basis.dim()) continue;
    bool match = true;
    for (std::size_t i = 0; i < basis.dim() && match; ++i) {
      match = same_ray(cand.matrix().col(to_index(i)), basis.matrix().col(to_index(i)), tol.ortho);
    }
    if (match) basis_id = b;
  }
  if (!state_id || !basis_id) throw TableLookupError("UserTable: state or basis not registered");
  std::vector<double> out(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto it = table.entries.find({*state_id, *basis_id, i});
    if (it == table.entries.end()) throw TableLookupError("UserTable: missing entry");
    out[i] = it->second;
  }
  return out;
}

}  // namespace detail

/// Probability of every outcome of `basis` on `psi` under `rule`.
inline std::vector<double> evaluate(const FrameRule& rule, const StateVector& psi,
                                    const OrthonormalBasis& basis,
                                    const Tolerances& tol = kDefaultTolerances) {
  detail::require_same_dim(psi.dim(), basis.dim(), "evaluate");
  const std::size_t dim = basis.dim();
  std::vector<double> p(dim);

  const auto amplitudes_of = [&] { return amplitudes(psi, basis); };
  const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };

  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, rules::Born>) {
          const CVector c = amplitudes_of();
          for (std::size_t i = 0; i < dim; ++i) p[i] = clamp01(std::norm(c[detail::to_index(i)]));
        } else if constexpr (std::is_same_v<K, rules::PowerLaw>) {
          const CVector c = amplitudes_of();
          double total = 0.0;
          for (std::size_t i = 0; i < dim; ++i) {
            p[i] = std::pow(std::abs(c[detail::to_index(i)]), kind.alpha);
            total += p[i];
          }
          if (kind.context_normalized) {
            if (!(total > 0.0)) throw DegenerateContextError("PowerLaw: zero weight sum");
            for (double& x : p) x = clamp01(x / total);
          } else {
            for (double& x : p) x = clamp01(x);
          }
        } else if constexpr (std::is_same_v<K, rules::Dim2Sector>) {
          if (dim != 2) throw DimensionError("Dim2Sector: defined on dimension 2 only");
          for (std::size_t i = 0; i < 2; ++i) {
            const auto n = bloch_vector(basis.matrix().col(detail::to_index(i)));
            const double d = n[0] * kind.axis[0] + n[1] * kind.axis[1] + n[2] * kind.axis[2];
            p[i] = std::abs(d) <= tol.norm ? 0.5 : (d > 0.0 ? 1.0 : 0.0);
          }
        } else if constexpr (std::is_same_v<K, rules::PhaseSensitiveStub>) {
          const CVector c = amplitudes_of();
          for (std::size_t i = 0; i < dim; ++i) {
            const double re = c[detail::to_index(i)].real();
            p[i] = clamp01(re * re);
          }
        } else {
          p = detail::evaluate_table(kind, psi, basis, tol);
        }
      },
      rule.kind());
  return p;
}

/// Probability of the single outcome `v`, evaluated in the context obtained
/// by completing {v} with orthonormal_complete (outcome index 0).
inline double evaluate_outcome(const FrameRule& rule, const StateVector& psi, const CVector& v,
                               const Tolerances& tol = kDefaultTolerances) {
  const CVector seeds[] = {v};
  const auto basis = orthonormal_complete(std::span<const CVector>(seeds), psi.dim(), tol);
  return evaluate(rule, psi, basis, tol)[0];
}

}  // namespace qlab
