#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "vfl/codec.hpp"
#include "vfl/errors.hpp"
#include "vfl/rng.hpp"

using namespace vfl;
using oracle::cpp_int;
using oracle::cpp_rational;

namespace {
Codec make(int dp, double max_abs = 1.0, std::uint32_t clients = 1) {
  return Codec(Precision(dp), EncodingBounds{max_abs, clients});
}
}  // namespace

TEST(Precision, Range) {
  EXPECT_THROW(Precision(0), InvalidArgument);
  EXPECT_THROW(Precision(13), InvalidArgument);
  EXPECT_EQ(Precision(12).scale(), 1000000000000ull);
  EXPECT_EQ(Precision().decimal_places(), 4);
}

TEST(Codec, EncodeExamples) {
  EXPECT_EQ(oracle::to_int(make(4, 2.0).encode(1.2345)), 12345);
  EXPECT_EQ(oracle::to_int(make(2).encode(-0.5)), oracle::modulus() - 50);
  EXPECT_TRUE(make(8).encode(0.0).is_zero());
}

TEST(Codec, DecodeExamples) {
  const Codec c1 = make(1, 1.0, 2);
  EXPECT_EQ(c1.decode(c1.encode(0.1) + c1.encode(0.2)), 0.3);
  const Codec c2 = make(2);
  EXPECT_EQ(c2.decode(FieldScalar::zero() - FieldScalar::from_u64(50)), -0.5);
}

TEST(Codec, RoundingMatchesExactOracle) {
  Rng rng(seed_from_hex("c0"));
  for (int dp : {1, 2, 4, 6, 8, 12}) {
    const Codec c = make(dp, 10.0);
    for (int k = 0; k < 3000; ++k) {
      const double x = 20.0 * rng.next_unit() - 10.0;
      const cpp_int expect = oracle::round_fixed(x, dp);
      ASSERT_EQ(cpp_int(c.to_fixed(x)), expect) << x << " dp=" << dp;
      ASSERT_EQ(oracle::to_int(c.encode(x)), oracle::mod(expect));
    }
  }
}

TEST(Codec, HalfwayCasesRoundAwayFromZero) {
  // 0.125 and 2.5 are exact binary fractions, so these are true ties.
  EXPECT_EQ(make(2).to_fixed(0.125), 13);
  EXPECT_EQ(make(2).to_fixed(-0.125), -13);
  EXPECT_EQ(make(1, 4.0).to_fixed(0.25), 3);
  EXPECT_EQ(make(1, 4.0).to_fixed(-0.25), -3);
  // 1.005 is slightly below the decimal tie in binary64.
  EXPECT_EQ(make(2, 2.0).to_fixed(1.005), 100);
}

TEST(Codec, SumOfHundredValuesIsExact) {
  Rng rng(seed_from_hex("c1"));
  for (int dp : {2, 4, 8}) {
    const Codec c = make(dp, 10.0, 100);
    FieldScalar acc;
    cpp_int sum = 0;
    for (int k = 0; k < 100; ++k) {
      const double x = 20.0 * rng.next_unit() - 10.0;
      acc += c.encode(x);
      sum += oracle::round_fixed(x, dp);
    }
    EXPECT_EQ(cpp_int(c.lift(acc)), sum);
    const double expect = oracle::nearest_double(cpp_rational(sum, oracle::pow10(dp)));
    EXPECT_EQ(c.decode(acc), expect);
  }
}

TEST(Codec, SignSymmetry) {
  Rng rng(seed_from_hex("c2"));
  const Codec c = make(4);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.next_unit();
    if (c.to_fixed(x) == 0) continue;
    EXPECT_EQ(c.encode(-x), FieldScalar::zero() - c.encode(x));
  }
}

TEST(Codec, RoundtripWithinHalfUnit) {
  Rng rng(seed_from_hex("c3"));
  for (int dp : {2, 4, 6, 8}) {
    const Codec c = make(dp);
    const double tol = 0.5 * std::pow(10.0, -dp);
    for (int k = 0; k < 20000; ++k) {
      const double x = 2.0 * rng.next_unit() - 1.0;
      ASSERT_LE(std::abs(c.decode(c.encode(x)) - x), tol) << x;
    }
  }
}

TEST(Codec, DivideByCount) {
  const Codec c = make(2, 6.0);
  EXPECT_EQ(c.divide_by_count(c.encode(6.0), 3), 2.0);
  const Codec c4 = make(4, 1.5, 4);
  FieldScalar acc;
  for (int k = 0; k < 4; ++k) acc += c4.encode(1.5);
  EXPECT_EQ(c4.divide_by_count(acc, 4), 1.5);
  EXPECT_THROW(c4.divide_by_count(acc, 0), InvalidArgument);
}

TEST(Codec, DivideByCountIsCorrectlyRounded) {
  Rng rng(seed_from_hex("c4"));
  for (int dp : {2, 4, 6}) {
    const Codec c = make(dp, 1.0, 5);
    for (int trial = 0; trial < 500; ++trial) {
      FieldScalar acc;
      cpp_int sum = 0;
      for (int k = 0; k < 5; ++k) {
        const double x = 2.0 * rng.next_unit() - 1.0;
        acc += c.encode(x);
        sum += oracle::round_fixed(x, dp);
      }
      const cpp_rational mean(sum, oracle::pow10(dp) * 5);
      const double got = c.divide_by_count(acc, 5);
      ASSERT_EQ(got, oracle::nearest_double(mean));
      ASSERT_LE(std::abs(got - static_cast<double>(mean)), std::pow(10.0, -dp));
    }
  }
}

TEST(Codec, RatioToDoubleAgainstOracle) {
  Rng rng(seed_from_hex("c5"));
  for (int k = 0; k < 2000; ++k) {
    const int128 num = static_cast<int128>(static_cast<std::int64_t>(rng.next_u64())) << (rng.next_u64() % 60);
    const uint128 den = (static_cast<uint128>(rng.next_u64()) << (rng.next_u64() % 50)) | 1;
    const cpp_rational r{cpp_int(num), cpp_int(den)};
    ASSERT_EQ(ratio_to_double(num, den), oracle::nearest_double(r));
  }
  EXPECT_EQ(ratio_to_double(1, 3), 1.0 / 3.0);
  EXPECT_EQ(ratio_to_double(-7, 2), -3.5);
  EXPECT_EQ(ratio_to_double(0, 9), 0.0);
}

TEST(Codec, Errors) {
  const Codec c = make(4);
  EXPECT_THROW(c.encode(1.5), EncodingOverflow);
  EXPECT_THROW(c.encode(std::nan("")), EncodingOverflow);
  EXPECT_THROW(c.encode(INFINITY), EncodingOverflow);
  // 3 units of max_abs with max_clients = 1 is a wrapped or foreign value.
  EXPECT_THROW(c.decode(FieldScalar::from_u64(30000)), DecodeRangeError);
  EXPECT_THROW(c.decode(FieldScalar::zero() - FieldScalar::from_u64(30000)), DecodeRangeError);
  EXPECT_THROW(Codec(Precision(12), EncodingBounds{1e30, 1000}), ConfigurationError);
  EXPECT_THROW(Codec(Precision(4), EncodingBounds{0.0, 1}), ConfigurationError);
}
