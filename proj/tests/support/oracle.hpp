#pragma once

// Reference arithmetic for tests, written against boost::multiprecision and
// libsodium rather than the library's own field and codec code.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include "vfl/field.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline const cpp_int& modulus() {
  static const cpp_int p("52435875175126190479447740508185965837690552500527637822603658699938581184513");
  return p;
}

inline cpp_int to_int(const vfl::FieldScalar& v) {
  const auto limbs = v.limbs();
  cpp_int out = 0;
  for (int i = 3; i >= 0; --i) out = (out << 64) | cpp_int(limbs[static_cast<std::size_t>(i)]);
  return out;
}

inline cpp_int mod(const cpp_int& v) {
  cpp_int r = v % modulus();
  if (r < 0) r += modulus();
  return r;
}

inline cpp_int pow10(int k) {
  cpp_int r = 1;
  for (int i = 0; i < k; ++i) r *= 10;
  return r;
}

// Exact rational value of a finite double.
inline cpp_rational exact(double x) {
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  cpp_rational r(mant);
  e -= 53;
  if (e >= 0) return r * cpp_rational(cpp_int(1) << e);
  return r / cpp_rational(cpp_int(1) << -e);
}

// round-half-away-from-zero(x * 10^dp), computed exactly: |x| = mant * 2^e.
inline cpp_int round_fixed(double x, int dp) {
  int e = 0;
  const double m = std::frexp(std::fabs(x), &e);
  const cpp_int v = cpp_int(static_cast<std::int64_t>(std::ldexp(m, 53))) * pow10(dp);
  e -= 53;
  cpp_int q;
  if (e >= 0) {
    q = v << e;
  } else {
    q = v >> -e;
    const cpp_int rem = v - (q << -e);
    if ((rem << 1) >= (cpp_int(1) << -e)) q += 1;
  }
  return std::signbit(x) ? cpp_int(-q) : q;
}

// Nearest double to r, ties to even, by bracketing with exact comparisons.
inline double nearest_double(const cpp_rational& r) {
  double guess = static_cast<double>(r);
  if (!std::isfinite(guess)) return guess;
  // Walk until lo <= r <= hi with hi = nextafter(lo).
  double lo = guess, hi = guess;
  while (exact(lo) > r) lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
  while (exact(hi) < r) hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  if (lo == hi) return lo;
  while (std::nextafter(lo, hi) != hi) {
    const double mid = std::nextafter(lo, hi);
    if (exact(mid) <= r) lo = mid; else hi = mid;
  }
  const cpp_rational dl = r - exact(lo), dh = exact(hi) - r;
  if (dl < dh) return lo;
  if (dh < dl) return hi;
  std::int64_t bits = 0;
  std::memcpy(&bits, &lo, sizeof bits);
  return (bits & 1) == 0 ? lo : hi;
}

}  // namespace oracle
