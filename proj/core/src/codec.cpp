#include "vfl/codec.hpp"

#include <cmath>
#include <string>

#include "vfl/errors.hpp"

namespace vfl {

namespace {

constexpr uint128 kU128One = 1;
// Lifts are carried in signed 128-bit integers; sums must stay clear of the sign bit.
constexpr uint128 kMaxLift = kU128One << 126;

std::uint64_t pow10(int n) {
  std::uint64_t v = 1;
  for (int i = 0; i < n; ++i) v *= 10;
  return v;
}

// round_half_away_from_zero(|x| * scale) computed exactly from the binary64
// value of x. Returns false if the result does not fit below kMaxLift.
bool fixed_magnitude(double x, std::uint64_t scale, uint128& out) {
  int exp = 0;
  const double frac = std::frexp(std::fabs(x), &exp);  // |x| = frac * 2^exp, frac in [0.5, 1)
  if (frac == 0.0) {
    out = 0;
    return true;
  }
  const auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));  // exact, < 2^53
  const int shift = exp - 53;                                         // |x| = mant * 2^shift
  const uint128 t = static_cast<uint128>(mant) * scale;  // < 2^117
  if (shift >= 0) {
    if (shift >= 127) return false;
    if (t > (kMaxLift >> shift)) return false;
    out = t << shift;
    return true;
  }
  const int s = -shift;
  if (s >= 128) {
    out = 0;  // t < 2^117 <= 2^(s-1): strictly below one half
    return true;
  }
  const uint128 q = t >> s;
  const uint128 rem = t - (q << s);
  const uint128 half = kU128One << (s - 1);
  out = rem >= half ? q + 1 : q;
  return out <= kMaxLift;
}

}  // namespace

Precision::Precision(int decimal_places) : dp_(decimal_places) {
  if (decimal_places < kMin || decimal_places > kMax) {
    throw InvalidArgument("decimal places must be in [1, 12], got " + std::to_string(decimal_places));
  }
  scale_ = pow10(decimal_places);
}

Codec::Codec(Precision precision, EncodingBounds bounds) : precision_(precision), bounds_(bounds) {
  if (!std::isfinite(bounds.max_abs_value) || bounds.max_abs_value <= 0.0) {
    throw ConfigurationError("max_abs_value must be positive and finite");
  }
  if (bounds.max_clients == 0) throw ConfigurationError("max_clients must be positive");
  uint128 per_value = 0;
  if (!fixed_magnitude(bounds.max_abs_value, precision.scale(), per_value) ||
      per_value > kMaxLift / bounds.max_clients) {
    throw ConfigurationError("encoding bounds exceed the field's signed range");
  }
  max_lift_ = per_value * bounds.max_clients;
}

int128 Codec::to_fixed(double x) const {
  if (!std::isfinite(x) || std::fabs(x) > bounds_.max_abs_value) {
    throw EncodingOverflow("value " + std::to_string(x) + " outside declared bound");
  }
  uint128 mag = 0;
  if (!fixed_magnitude(x, precision_.scale(), mag)) throw EncodingOverflow("value does not fit");
  const auto v = static_cast<int128>(mag);
  return std::signbit(x) ? -v : v;
}

FieldScalar Codec::encode(double x) const {
  const int128 v = to_fixed(x);
  if (v >= 0) return FieldScalar::from_u128(static_cast<uint128>(v));
  return -FieldScalar::from_u128(static_cast<uint128>(-v));
}

int128 Codec::lift(const FieldScalar& v) const {
  const auto limbs = v.limbs();
  const auto& p = field_modulus();
  // (p - 1) / 2 comparison on the top limb suffices: its top limb is
  // p[3] >> 1 and every admissible magnitude lives in the low two limbs.
  const bool negative = limbs[3] > (p[3] >> 1);
  const auto mag_limbs = negative ? (-v).limbs() : limbs;
  if (mag_limbs[2] != 0 || mag_limbs[3] != 0) {
    throw DecodeRangeError("centered lift outside declared bounds (wraparound?)");
  }
  const uint128 mag =
      (static_cast<uint128>(mag_limbs[1]) << 64) | mag_limbs[0];
  if (mag > max_lift_) throw DecodeRangeError("centered lift outside declared bounds");
  const auto s = static_cast<int128>(mag);
  return negative ? -s : s;
}

double Codec::decode(const FieldScalar& v) const { return ratio_to_double(lift(v), precision_.scale()); }

double Codec::divide_by_count(const FieldScalar& v, std::uint64_t n) const {
  if (n == 0) throw InvalidArgument("cannot average over zero clients");
  const auto den = static_cast<uint128>(precision_.scale()) * n;
  return ratio_to_double(lift(v), den);
}

double ratio_to_double(int128 num, uint128 den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  if (den >= (kU128One << 126)) throw InvalidArgument("denominator too large");
  if (num == 0) return 0.0;
  const bool negative = num < 0;
  uint128 mag = negative ? static_cast<uint128>(-(num + 1)) + 1
                                   : static_cast<uint128>(num);

  // Long division until the quotient carries 55 significant bits.
  uint128 q = mag / den;
  uint128 r = mag % den;
  int exp2 = 0;
  bool sticky = false;
  constexpr uint128 kLow = kU128One << 54;
  constexpr uint128 kHigh = kU128One << 55;
  while (q < kLow) {
    q <<= 1;
    r <<= 1;
    if (r >= den) {
      q |= 1;
      r -= den;
    }
    --exp2;
  }
  while (q >= kHigh) {
    sticky |= (q & 1) != 0;
    q >>= 1;
    ++exp2;
  }
  sticky |= r != 0;
  sticky |= (q & 1) != 0;
  auto mant = static_cast<std::uint64_t>(q >> 2);
  const bool round_bit = ((q >> 1) & 1) != 0;
  if (round_bit && (sticky || (mant & 1))) ++mant;
  const double out = std::ldexp(static_cast<double>(mant), exp2 + 2);
  return negative ? -out : out;
}

}  // namespace vfl
