#pragma once

#include <cstdint>

#include "vfl/field.hpp"

namespace vfl {

// Number of decimal places kept when embedding reals into F_p.
class Precision {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 12;
  static constexpr int kDefault = 4;

  Precision() : Precision(kDefault) {}
  // Throws InvalidArgument outside [kMin, kMax].
  explicit Precision(int decimal_places);

  int decimal_places() const { return dp_; }
  std::uint64_t scale() const { return scale_; }

  friend bool operator==(const Precision&, const Precision&) = default;

 private:
  int dp_;
  std::uint64_t scale_;
};

// Declared magnitude limits. Sums of up to `max_clients` values of magnitude
// `max_abs_value` must stay below (p - 1) / 2 after scaling, so the centered
// lift never wraps.
struct EncodingBounds {
  double max_abs_value = 1.0;
  std::uint32_t max_clients = 1;

  friend bool operator==(const EncodingBounds&, const EncodingBounds&) = default;
};

// Fixed-point codec: encode(x) = round_half_away(x * 10^dp) mod p, decode is
// the centered lift divided by the scale. Stateless apart from its
// configuration; safe to share across threads.
class Codec {
 public:
  // Throws ConfigurationError when the bounds cannot be honoured.
  Codec(Precision precision, EncodingBounds bounds);

  const Precision& precision() const { return precision_; }
  const EncodingBounds& bounds() const { return bounds_; }

  // Throws EncodingOverflow for non-finite x or |x| > max_abs_value.
  FieldScalar encode(double x) const;
  // Throws DecodeRangeError if the centered lift exceeds
  // max_clients * max_abs_value * scale.
  double decode(const FieldScalar& v) const;
  // decode(v) / n, correctly rounded from the exact rational.
  // Throws InvalidArgument for n == 0.
  double divide_by_count(const FieldScalar& v, std::uint64_t n) const;

  // Signed fixed-point integer that encode(x) embeds.
  int128 to_fixed(double x) const;
  // Centered lift of v, range-checked like decode.
  int128 lift(const FieldScalar& v) const;

 private:
  Precision precision_;
  EncodingBounds bounds_;
  uint128 max_lift_;
};

// Nearest binary64 to num / den (ties to even). den must be nonzero.
double ratio_to_double(int128 num, uint128 den);

}  // namespace vfl
