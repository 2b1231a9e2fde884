#include <gtest/gtest.h>

#include "oracle.hpp"
#include "vfl/errors.hpp"
#include "vfl/field.hpp"
#include "vfl/rng.hpp"

using namespace vfl;
using oracle::cpp_int;

TEST(Field, ModulusMatchesReference) {
  const auto& limbs = field_modulus();
  cpp_int p = 0;
  for (int i = 3; i >= 0; --i) p = (p << 64) | cpp_int(limbs[static_cast<std::size_t>(i)]);
  EXPECT_EQ(p, oracle::modulus());
}

TEST(Field, ArithmeticAgreesWithBigIntegers) {
  Rng rng(seed_from_hex("01"));
  for (int k = 0; k < 500; ++k) {
    const FieldScalar a = rng.field(), b = rng.field();
    const cpp_int A = oracle::to_int(a), B = oracle::to_int(b);
    ASSERT_LT(A, oracle::modulus());
    EXPECT_EQ(oracle::to_int(a + b), oracle::mod(A + B));
    EXPECT_EQ(oracle::to_int(a - b), oracle::mod(A - B));
    EXPECT_EQ(oracle::to_int(a * b), oracle::mod(A * B));
    EXPECT_EQ(oracle::to_int(-a), oracle::mod(-A));
  }
}

TEST(Field, SignedEmbedding) {
  EXPECT_EQ(oracle::to_int(FieldScalar::from_i64(-50)), oracle::modulus() - 50);
  EXPECT_EQ(oracle::to_int(FieldScalar::from_i64(12345)), 12345);
  const uint128 big = (static_cast<uint128>(1) << 100) + 7;
  EXPECT_EQ(oracle::to_int(FieldScalar::from_u128(big)), (cpp_int(1) << 100) + 7);
}

TEST(Field, ReduceWideInput) {
  Bytes wide(64, 0xff);
  const cpp_int v = (cpp_int(1) << 512) - 1;
  EXPECT_EQ(oracle::to_int(FieldScalar::reduce_le(wide)), oracle::mod(v));
}

TEST(Field, CanonicalDecodingRejectsNonCanonical) {
  Rng rng(seed_from_hex("02"));
  const FieldScalar a = rng.field();
  const auto bytes = a.to_le_bytes();
  EXPECT_EQ(FieldScalar::from_canonical_le(bytes), a);

  std::array<std::uint8_t, 32> p_bytes{};
  const auto& limbs = field_modulus();
  for (std::size_t i = 0; i < 32; ++i) p_bytes[i] = static_cast<std::uint8_t>(limbs[i / 8] >> (8 * (i % 8)));
  EXPECT_THROW(FieldScalar::from_canonical_le(p_bytes), DeserializationError);
  EXPECT_THROW(FieldScalar::from_canonical_le(ByteView(bytes.data(), 31)), DeserializationError);
}

TEST(Field, VectorOpsCheckLength) {
  FieldVector a(3), b(4);
  EXPECT_THROW(add_assign(a, b), DimensionError);
  FieldVector c{FieldScalar::one(), FieldScalar::one(), FieldScalar::one()};
  add_assign(a, c);
  sub_assign(a, c);
  for (const auto& v : a) EXPECT_TRUE(v.is_zero());
}

TEST(Rng, SeededStreamsAreReproducibleAndDerivedStreamsDiffer) {
  Rng a(seed_from_hex("aa")), b(seed_from_hex("aa"));
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c = a.derive("x", 1), d = a.derive("x", 2);
  EXPECT_NE(c.next_u64(), d.next_u64());
  for (int k = 0; k < 1000; ++k) {
    const double u = a.next_unit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto v = a.uniform(3, 9);
    EXPECT_GE(v, 3u);
    EXPECT_LE(v, 9u);
  }
  EXPECT_FALSE(a.nonzero_field().is_zero());
}
