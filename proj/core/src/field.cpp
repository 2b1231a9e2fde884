#include "vfl/field.hpp"

#include "vfl/errors.hpp"

namespace vfl {

namespace {
constexpr std::array<std::uint64_t, 4> kModulus = {
    0xffffffff00000001ULL, 0x53bda402fffe5bfeULL, 0x3339d80809a1d805ULL, 0x73eda753299d7d48ULL};

bool less_than_modulus(const std::array<std::uint64_t, 4>& v) {
  for (int i = 3; i >= 0; --i) {
    if (v[i] != kModulus[i]) return v[i] < kModulus[i];
  }
  return false;
}
}  // namespace

const std::array<std::uint64_t, 4>& field_modulus() { return kModulus; }

FieldScalar FieldScalar::one() { return from_u64(1); }

FieldScalar FieldScalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  FieldScalar out;
  blst_fr_from_uint64(&out.v_, limbs);
  return out;
}

FieldScalar FieldScalar::from_u128(uint128 v) {
  const std::uint64_t limbs[4] = {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64), 0, 0};
  FieldScalar out;
  blst_fr_from_uint64(&out.v_, limbs);
  return out;
}

FieldScalar FieldScalar::from_i64(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  // -(v + 1) + 1 avoids overflow at INT64_MIN.
  const auto mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
  return -from_u64(mag);
}

FieldScalar FieldScalar::reduce_le(ByteView data) {
  blst_scalar s;
  blst_scalar_from_le_bytes(&s, data.data(), data.size());
  FieldScalar out;
  blst_fr_from_scalar(&out.v_, &s);
  return out;
}

FieldScalar FieldScalar::from_canonical_le(ByteView data) {
  if (data.size() != kBytes) throw DeserializationError("field element must be 32 bytes");
  std::array<std::uint64_t, 4> limbs{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t b = 0; b < 8; ++b) limbs[i] |= static_cast<std::uint64_t>(data[8 * i + b]) << (8 * b);
  }
  if (!less_than_modulus(limbs)) throw DeserializationError("field element not reduced");
  FieldScalar out;
  blst_fr_from_uint64(&out.v_, limbs.data());
  return out;
}

std::array<std::uint64_t, 4> FieldScalar::limbs() const {
  std::array<std::uint64_t, 4> out{};
  blst_uint64_from_fr(out.data(), &v_);
  return out;
}

std::array<std::uint8_t, 32> FieldScalar::to_le_bytes() const {
  const auto l = limbs();
  std::array<std::uint8_t, 32> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t b = 0; b < 8; ++b) out[8 * i + b] = static_cast<std::uint8_t>(l[i] >> (8 * b));
  }
  return out;
}

blst_scalar FieldScalar::to_blst_scalar() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  return s;
}

std::string FieldScalar::to_hex() const {
  const auto b = to_le_bytes();
  return vfl::to_hex(b);
}

bool FieldScalar::is_zero() const {
  const auto l = limbs();
  return (l[0] | l[1] | l[2] | l[3]) == 0;
}

FieldScalar FieldScalar::operator+(const FieldScalar& o) const {
  FieldScalar out;
  blst_fr_add(&out.v_, &v_, &o.v_);
  return out;
}

FieldScalar FieldScalar::operator-(const FieldScalar& o) const {
  FieldScalar out;
  blst_fr_sub(&out.v_, &v_, &o.v_);
  return out;
}

FieldScalar FieldScalar::operator*(const FieldScalar& o) const {
  FieldScalar out;
  blst_fr_mul(&out.v_, &v_, &o.v_);
  return out;
}

FieldScalar FieldScalar::operator-() const {
  FieldScalar out;
  blst_fr_cneg(&out.v_, &v_, true);
  return out;
}

FieldScalar& FieldScalar::operator+=(const FieldScalar& o) {
  blst_fr_add(&v_, &v_, &o.v_);
  return *this;
}

FieldScalar& FieldScalar::operator-=(const FieldScalar& o) {
  blst_fr_sub(&v_, &v_, &o.v_);
  return *this;
}

bool operator==(const FieldScalar& a, const FieldScalar& b) {
  return a.limbs() == b.limbs();
}

void add_assign(std::span<FieldScalar> a, std::span<const FieldScalar> b) {
  if (a.size() != b.size()) throw DimensionError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void sub_assign(std::span<FieldScalar> a, std::span<const FieldScalar> b) {
  if (a.size() != b.size()) throw DimensionError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
}

}  // namespace vfl
