#include <gtest/gtest.h>

#include "vfl/errors.hpp"
#include "vfl/group.hpp"
#include "vfl/rng.hpp"

using namespace vfl;

TEST(Group, ScalarMultiplicationIsLinear) {
  Rng rng(seed_from_hex("90"));
  const FieldScalar a = rng.field(), b = rng.field();
  const G1 g = G1::generator();
  EXPECT_EQ(g * a + g * b, g * (a + b));
  EXPECT_EQ((g * a) * b, g * (a * b));
  EXPECT_TRUE((g * a - g * a).is_identity());
  const G2 h = G2::generator();
  EXPECT_EQ(h * a + h * b, h * (a + b));
}

TEST(Group, PairingIsBilinear) {
  Rng rng(seed_from_hex("91"));
  const FieldScalar a = rng.nonzero_field(), b = rng.nonzero_field();
  const GT lhs = pairing(G1::generator() * a, G2::generator() * b);
  const GT rhs = pairing(G1::generator() * (a * b), G2::generator());
  EXPECT_EQ(lhs, rhs);
  EXPECT_FALSE(pairing(G1::generator(), G2::generator()).is_one());
  const G1 ps[] = {G1::generator() * a, -(G1::generator() * (a * b))};
  const G2 qs[] = {G2::generator() * b, G2::generator()};
  EXPECT_TRUE(pairing_product_is_one(ps, qs));
  const G2 bad[] = {G2::generator() * b, G2::generator() * b};
  EXPECT_FALSE(pairing_product_is_one(ps, bad));
}

TEST(Group, MsmMatchesNaiveSum) {
  Rng rng(seed_from_hex("92"));
  std::vector<G1> pts;
  for (int i = 0; i < 37; ++i) pts.push_back(G1::hash(as_bytes("pt" + std::to_string(i)), "TEST/"));
  const G1Bases bases(pts);
  FieldVector xs(30);
  for (auto& x : xs) x = rng.field();
  xs[3] = FieldScalar::zero();
  G1 naive;
  for (std::size_t i = 0; i < xs.size(); ++i) naive += pts[i + 5] * xs[i];
  for (std::size_t parts : {1u, 2u, 3u, 7u}) {
    EXPECT_EQ(msm(bases, 5, xs, parts, 2), naive) << parts;
  }
  EXPECT_THROW(msm(bases, 10, xs), DimensionError);
  EXPECT_TRUE(msm(bases, 0, FieldVector{}).is_identity());
}

TEST(Group, CompressionRoundTripsAndRejectsGarbage) {
  Rng rng(seed_from_hex("93"));
  for (int k = 0; k < 20; ++k) {
    const G1 p = G1::generator() * rng.field();
    const auto c = p.compress();
    EXPECT_EQ(G1::decompress(c), p);
    const G2 q = G2::generator() * rng.field();
    const auto d = q.compress();
    EXPECT_EQ(G2::decompress(d), q);
  }
  const auto c = G1::generator().compress();
  EXPECT_THROW(G1::decompress(ByteView(c.data(), 47)), DeserializationError);
  Bytes junk(48, 0x11);
  EXPECT_THROW(G1::decompress(junk), DeserializationError);
  EXPECT_EQ(G1::decompress(G1::identity().compress()), G1::identity());
}

TEST(Group, SubgroupCheckRejectsOffSubgroupPoint) {
  const auto bad = vfl::testing::off_subgroup_g1_point();
  EXPECT_THROW(G1::decompress(bad), DeserializationError);
  vfl::testing::set_subgroup_checks(false);
  const G1 p = G1::decompress(bad);
  vfl::testing::set_subgroup_checks(true);
  EXPECT_FALSE(p.in_group());
}

TEST(Group, HashToCurveIsDomainSeparated) {
  const G1 a = G1::hash(as_bytes("m"), "A/");
  EXPECT_EQ(a, G1::hash(as_bytes("m"), "A/"));
  EXPECT_NE(a, G1::hash(as_bytes("m"), "B/"));
  EXPECT_TRUE(a.in_group());
  EXPECT_FALSE(a.is_identity());
}
