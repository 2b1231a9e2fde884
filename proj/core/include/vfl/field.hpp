#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <blst.h>

#include "vfl/bytes.hpp"

namespace vfl {

__extension__ typedef __int128 int128;
__extension__ typedef unsigned __int128 uint128;

// Element of the BLS12-381 scalar field F_p, p = 0x73eda753...00000001.
// Stored in Montgomery form; every operation keeps it fully reduced, so
// representation equality is value equality.
class FieldScalar {
 public:
  static constexpr std::size_t kBytes = 32;

  FieldScalar() : v_{} {}

  static FieldScalar zero() { return {}; }
  static FieldScalar one();
  static FieldScalar from_u64(std::uint64_t v);
  static FieldScalar from_u128(uint128 v);
  // Signed embedding: negative values map to p - |v|.
  static FieldScalar from_i64(std::int64_t v);
  // Interprets `data` as a little-endian integer of any length and reduces mod p.
  static FieldScalar reduce_le(ByteView data);
  // Strict canonical decoding: throws DeserializationError unless the 32
  // bytes encode an integer < p.
  static FieldScalar from_canonical_le(ByteView data);

  // Canonical little-endian limbs of the integer in [0, p).
  std::array<std::uint64_t, 4> limbs() const;
  std::array<std::uint8_t, 32> to_le_bytes() const;
  // blst scalar (canonical little-endian bytes) for scalar multiplication.
  blst_scalar to_blst_scalar() const;
  std::string to_hex() const;

  bool is_zero() const;

  FieldScalar operator+(const FieldScalar& o) const;
  FieldScalar operator-(const FieldScalar& o) const;
  FieldScalar operator*(const FieldScalar& o) const;
  FieldScalar operator-() const;
  FieldScalar& operator+=(const FieldScalar& o);
  FieldScalar& operator-=(const FieldScalar& o);

  friend bool operator==(const FieldScalar& a, const FieldScalar& b);

  const blst_fr& raw() const { return v_; }

 private:
  blst_fr v_;
};

using FieldVector = std::vector<FieldScalar>;

// p as canonical little-endian limbs.
const std::array<std::uint64_t, 4>& field_modulus();

// Elementwise a += b; throws DimensionError on length mismatch.
void add_assign(std::span<FieldScalar> a, std::span<const FieldScalar> b);
void sub_assign(std::span<FieldScalar> a, std::span<const FieldScalar> b);

}  // namespace vfl
