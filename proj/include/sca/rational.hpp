#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "sca/errors.hpp"

namespace sca {

// Exact arithmetic only. Probabilities never touch floating point; verdicts
// compare these values with operator==.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt ipow(const BigInt& base, std::uint64_t exp) {
  BigInt r = 1;
  BigInt b = base;
  std::uint64_t e = exp;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline Rational make_fraction(const BigInt& num, const BigInt& den) {
  return Rational(num, den);  // canonicalizes: reduced, denominator >= 1
}

/// "p/q" in lowest terms; integers render without the "/q" part ("1", "0").
inline std::string rational_to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational rational_from_string(std::string_view s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) {
      return Rational(BigInt(std::string(s)));
    }
    BigInt num{std::string(s.substr(0, slash))};
    BigInt den{std::string(s.substr(slash + 1))};
    if (den <= 0) throw SchemaError("rational denominator must be positive: " + std::string(s));
    return Rational(num, den);
  } catch (const std::exception& e) {
    throw SchemaError("malformed rational \"" + std::string(s) + "\": " + e.what());
  }
}

/// Non-normative decimal rendering for report output behind --decimal.
inline std::string rational_to_decimal(const Rational& r, int digits = 12) {
  const bool neg = r < 0;
  Rational a = neg ? Rational(-r) : r;
  BigInt ip = boost::multiprecision::numerator(a) / boost::multiprecision::denominator(a);
  Rational frac = a - Rational(ip);
  std::string out = (neg ? "-" : "") + ip.str();
  if (frac == 0) return out;
  out += '.';
  for (int i = 0; i < digits && frac != 0; ++i) {
    frac *= 10;
    BigInt d = boost::multiprecision::numerator(frac) / boost::multiprecision::denominator(frac);
    out += static_cast<char>('0' + static_cast<int>(d));
    frac -= Rational(d);
  }
  return out;
}

}  // namespace sca
