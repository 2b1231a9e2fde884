#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <blst.h>

#include "vfl/bytes.hpp"
#include "vfl/field.hpp"

namespace vfl {

// Value-semantic wrappers over blst points. Points are kept in Jacobian form;
// affine conversion happens only for serialization, pairings and MSM bases.

class G1 {
 public:
  static constexpr std::size_t kCompressedBytes = 48;
  using Compressed = std::array<std::uint8_t, kCompressedBytes>;

  G1() : p_{} {}  // identity
  explicit G1(const blst_p1& p) : p_(p) {}
  explicit G1(const blst_p1_affine& a);

  static G1 identity() { return {}; }
  static G1 generator();
  // Constant-time hash to G1 (RFC 9380 SSWU, random-oracle variant).
  static G1 hash(ByteView msg, std::string_view dst);

  G1 operator+(const G1& o) const;
  G1 operator-(const G1& o) const;
  G1 operator-() const;
  G1& operator+=(const G1& o);
  G1 operator*(const FieldScalar& k) const;
  // Multiplication by a short scalar given as little-endian bytes.
  G1 mul_bits(ByteView scalar_le, std::size_t nbits) const;

  bool is_identity() const;
  bool in_group() const;
  friend bool operator==(const G1& a, const G1& b);

  blst_p1_affine to_affine() const;
  Compressed compress() const;
  // Throws DeserializationError for malformed, off-curve or (when subgroup
  // checks are enabled) non-subgroup encodings.
  static G1 decompress(ByteView bytes);

  const blst_p1& raw() const { return p_; }

 private:
  blst_p1 p_;
};

class G2 {
 public:
  static constexpr std::size_t kCompressedBytes = 96;
  using Compressed = std::array<std::uint8_t, kCompressedBytes>;

  G2() : p_{} {}
  explicit G2(const blst_p2& p) : p_(p) {}
  explicit G2(const blst_p2_affine& a);

  static G2 identity() { return {}; }
  static G2 generator();

  G2 operator+(const G2& o) const;
  G2& operator+=(const G2& o);
  G2 operator-() const;
  G2 operator*(const FieldScalar& k) const;

  bool is_identity() const;
  bool in_group() const;
  friend bool operator==(const G2& a, const G2& b);

  blst_p2_affine to_affine() const;
  Compressed compress() const;
  static G2 decompress(ByteView bytes);

  const blst_p2& raw() const { return p_; }

 private:
  blst_p2 p_;
};

// Element of the target group, as produced by final exponentiation.
class GT {
 public:
  GT() : v_(*blst_fp12_one()) {}
  explicit GT(const blst_fp12& v) : v_(v) {}
  bool is_one() const { return blst_fp12_is_one(&v_); }
  friend bool operator==(const GT& a, const GT& b) { return blst_fp12_is_equal(&a.v_, &b.v_); }

 private:
  blst_fp12 v_;
};

GT pairing(const G1& p, const G2& q);

// True iff prod_i e(ps[i], qs[i]) == 1, with one shared final exponentiation.
bool pairing_product_is_one(std::span<const G1> ps, std::span<const G2> qs);

// Affine base table for repeated multi-scalar multiplications.
class G1Bases {
 public:
  G1Bases() = default;
  explicit G1Bases(std::span<const G1> points);

  std::size_t size() const { return affine_.size(); }
  const blst_p1_affine& operator[](std::size_t i) const { return affine_[i]; }
  std::span<const blst_p1_affine> view() const { return affine_; }
  // First n bases; they alias a prefix of this table's storage layout.
  G1Bases prefix(std::size_t n) const;

 private:
  std::vector<blst_p1_affine> affine_;
};

// sum_i scalars[i] * bases[offset + i] via Pippenger, with the index range
// split into `partitions` pieces evaluated by up to `workers` threads.
// Throws DimensionError if the range exceeds the table.
G1 msm(const G1Bases& bases, std::size_t offset, std::span<const FieldScalar> scalars,
       std::size_t partitions = 1, std::size_t workers = 1);

namespace testing {
// Mutation hook for self-tests: disables the subgroup check in decompress.
void set_subgroup_checks(bool enabled);
bool subgroup_checks_enabled();
// A point on the G1 curve outside the prime-order subgroup.
G1::Compressed off_subgroup_g1_point();
}  // namespace testing

}  // namespace vfl
