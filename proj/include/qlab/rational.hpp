#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qlab/errors.hpp"

namespace qlab {

using BigInt = boost::multiprecision::cpp_int;

/// Exact fraction in lowest terms with positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(long long n) : value_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
    value_ = den < 0 ? boost::multiprecision::cpp_rational(-num, -den)
                     : boost::multiprecision::cpp_rational(num, den);
  }

  /// The exact binary value of a finite double.
  static Rational from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("Rational::from_double: non-finite value");
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    // mantissa·2^53 is an integer for every finite double
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    exponent -= 53;
    BigInt num(scaled);
    BigInt den(1);
    if (exponent > 0) num <<= exponent;
    else den <<= -exponent;
    return {num, den};
  }

  /// Parses "p/q", an integer, or a plain decimal such as "0.999999999999999999".
  static Rational parse(const std::string& text) {
    const auto fail = [&] { return DomainError("Rational::parse: cannot read '" + text + "'"); };
    if (text.empty()) throw fail();
    try {
      if (const auto slash = text.find('/'); slash != std::string::npos) {
        return {parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1))};
      }
      std::string s = text;
      bool negative = false;
      if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        s.erase(0, 1);
      }
      const auto dot = s.find('.');
      std::string digits = s;
      std::size_t decimals = 0;
      if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        decimals = s.size() - dot - 1;
      }
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) throw fail();
      BigInt num = parse_integer(digits);
      if (negative) num = -num;
      return {num, boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(decimals))};
    } catch (const DomainError&) {
      throw;
    } catch (const std::exception&) {
      throw fail();
    }
  }

  BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  BigInt denominator() const { return boost::multiprecision::denominator(value_); }

  double to_double() const { return value_.convert_to<double>(); }

  /// "num/den", always with an explicit denominator.
  std::string to_string() const { return numerator().str() + "/" + denominator().str(); }

  Rational abs() const { return value_ < 0 ? -*this : *this; }
  bool is_zero() const { return value_ == 0; }

  Rational operator-() const { return Rational(-value_); }
  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.value_ == 0) throw DomainError("Rational: division by zero");
    value_ /= o.value_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

  /// Largest integer not exceeding the value.
  BigInt floor() const {
    BigInt q = numerator() / denominator();  // truncates toward zero
    if (value_ < 0 && q * denominator() != numerator()) --q;
    return q;
  }

 private:
  /// Optional sign and decimal digits only; never octal or hex.
  static BigInt parse_integer(const std::string& text) {
    std::size_t at = text.empty() || (text[0] != '-' && text[0] != '+') ? 0 : 1;
    const std::string digits = text.substr(at);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("not an integer");
    }
    const auto first = digits.find_first_not_of('0');
    BigInt value(first == std::string::npos ? std::string("0") : digits.substr(first));
    return at == 1 && text[0] == '-' ? BigInt(-value) : value;
  }

  explicit Rational(boost::multiprecision::cpp_rational v) : value_(std::move(v)) {}
  boost::multiprecision::cpp_rational value_{0};
};

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational out(1);
  for (unsigned i = 0; i < exponent; ++i) out *= base;
  return out;
}

}  // namespace qlab
