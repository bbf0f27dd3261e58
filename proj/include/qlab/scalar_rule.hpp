#pragma once

// Scalar layer of the derivation: p(a_i) = f(|c_i|²) with f on [0,1], and the
// exhaustive rational check of the additivity equation f(x+y) = f(x) + f(y).

#include <algorithm>
#include <functional>
#include <numeric>
#include <thread>
#include <variant>
#include <vector>

#include "qlab/rational.hpp"

namespace qlab {

/// Σ_j coefficients[j] · x^j
struct RationalPolynomial {
  std::vector<Rational> coefficients;

  template <typename T>
  T operator()(const T& x) const {
    T acc(0);
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
      acc = acc * x;
      if constexpr (std::is_same_v<T, Rational>) acc += *it;
      else acc += it->to_double();
    }
    return acc;
  }
};

/// Piece j applies on (upper_{j-1}, upper_j]; the first piece starts at 0.
struct PiecewisePolynomial {
  struct Piece {
    Rational upper;
    RationalPolynomial polynomial;
  };
  std::vector<Piece> pieces;
};

class ScalarRule {
 public:
  using Kind = std::variant<RationalPolynomial, PiecewisePolynomial, std::function<double(double)>>;

  /// Rejects rules without f(0) = 0 and f(1) = 1.
  ScalarRule(Kind kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {
    if (const auto* pw = std::get_if<PiecewisePolynomial>(&kind_)) {
      if (pw->pieces.empty()) throw RuleRegistrationError("ScalarRule: piecewise rule without pieces");
      for (std::size_t j = 1; j < pw->pieces.size(); ++j) {
        if (!(pw->pieces[j - 1].upper < pw->pieces[j].upper)) {
          throw RuleRegistrationError("ScalarRule: breakpoints must increase");
        }
      }
      if (pw->pieces.back().upper < Rational(1)) {
        throw RuleRegistrationError("ScalarRule: pieces must cover [0,1]");
      }
    }
    if (exact()) {
      if (!(*this)(Rational(0)).is_zero() || (*this)(Rational(1)) != Rational(1)) {
        throw RuleRegistrationError("ScalarRule '" + name_ + "': requires f(0)=0 and f(1)=1");
      }
    } else {
      const auto& f = std::get<std::function<double(double)>>(kind_);
      if (!f || std::abs(f(0.0)) > 1e-12 || std::abs(f(1.0) - 1.0) > 1e-12) {
        throw RuleRegistrationError("ScalarRule '" + name_ + "': requires f(0)=0 and f(1)=1");
      }
    }
  }

  static ScalarRule identity() { return {RationalPolynomial{{Rational(0), Rational(1)}}, "x"}; }
  static ScalarRule power(unsigned k) {
    std::vector<Rational> c(k + 1, Rational(0));
    c[k] = Rational(1);
    return {RationalPolynomial{std::move(c)}, "x^" + std::to_string(k)};
  }
  static ScalarRule piecewise(PiecewisePolynomial pw, std::string name = "piecewise") {
    return {std::move(pw), std::move(name)};
  }
  static ScalarRule floating(std::function<double(double)> f, std::string name = "float") {
    return {std::move(f), std::move(name)};
  }

  bool exact() const { return !std::holds_alternative<std::function<double(double)>>(kind_); }
  const std::string& name() const noexcept { return name_; }

  Rational operator()(const Rational& x) const {
    if (const auto* poly = std::get_if<RationalPolynomial>(&kind_)) return (*poly)(x);
    if (const auto* pw = std::get_if<PiecewisePolynomial>(&kind_)) {
      for (const auto& piece : pw->pieces) {
        if (x <= piece.upper) return piece.polynomial(x);
      }
      return pw->pieces.back().polynomial(x);
    }
    throw ExactnessError("ScalarRule '" + name_ + "' is not exactly evaluable");
  }

  double operator()(double x) const {
    if (const auto* f = std::get_if<std::function<double(double)>>(&kind_)) return (*f)(x);
    return (*this)(Rational::from_double(x)).to_double();
  }

 private:
  Kind kind_;
  std::string name_;
};

struct AdditivityScan {
  Rational residual;  // max |f(x+y) − f(x) − f(y)|
  Rational x;         // lexicographically smallest maximizer
  Rational y;
  std::size_t pairs = 0;
};

/// Rationals in [0,1] with denominator ≤ max_denominator, ascending.
inline std::vector<Rational> farey_points(unsigned max_denominator) {
  std::vector<Rational> out;
  for (unsigned q = 1; q <= max_denominator; ++q) {
    for (unsigned p = 0; p <= q; ++p) {
      if (std::gcd(p, q) == 1) out.emplace_back(BigInt(p), BigInt(q));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Exhaustive scan of every ordered pair (x, y) of points with denominators
/// ≤ max_denominator and x + y ≤ 1. The x range is split across `workers`
/// threads; the returned witness does not depend on the split.
inline AdditivityScan rational_additivity_scan(const ScalarRule& f, unsigned max_denominator,
                                               unsigned workers = 1) {
  if (max_denominator < 2) throw DomainError("rational_additivity_scan: Q must be >= 2");
  if (!f.exact()) throw ExactnessError("rational_additivity_scan: rule is not exactly evaluable");

  const auto points = farey_points(max_denominator);
  std::vector<Rational> values;
  values.reserve(points.size());
  for (const auto& x : points) values.push_back(f(x));

  const auto scan_range = [&](std::size_t begin, std::size_t end) {
    AdditivityScan best;
    bool have = false;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < points.size(); ++j) {
        const Rational sum = points[i] + points[j];
        if (sum > Rational(1)) break;
        const Rational r = (f(sum) - values[i] - values[j]).abs();
        ++best.pairs;
        if (!have || r > best.residual) {
          best.residual = r;
          best.x = points[i];
          best.y = points[j];
          have = true;
        }
      }
    }
    return best;
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  std::vector<AdditivityScan> parts(workers);
  if (workers == 1) {
    parts[0] = scan_range(0, points.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = std::min(points.size(), w * chunk);
      const std::size_t e = std::min(points.size(), b + chunk);
      pool.emplace_back([&, w, b, e] { parts[w] = scan_range(b, e); });
    }
    for (auto& t : pool) t.join();
  }

  AdditivityScan out = parts.front();
  out.pairs = 0;
  for (const auto& part : parts) {
    out.pairs += part.pairs;
    if (part.pairs == 0) continue;
    // parts are in ascending x order, so strict > keeps the earliest maximizer
    if (part.residual > out.residual) {
      out.residual = part.residual;
      out.x = part.x;
      out.y = part.y;
    }
  }
  return out;
}

}  // namespace qlab
