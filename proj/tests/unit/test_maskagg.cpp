#include <gtest/gtest.h>

#include <sodium.h>

#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "vfl/errors.hpp"
#include "vfl/maskagg.hpp"

using namespace vfl;
using namespace vfl::maskagg;
using oracle::cpp_int;

namespace {

std::vector<Identity> ids_upto(std::size_t n) {
  std::vector<Identity> ids;
  for (std::size_t k = 1; k <= n; ++k) ids.push_back(Identity{k * 3});
  return ids;
}

FieldVector random_vector(std::size_t d, Rng& rng) {
  FieldVector x(d);
  for (auto& v : x) v = rng.field();
  return x;
}

// Keystream straight from libsodium, 64-byte blocks read as little-endian
// integers and reduced with big-integer arithmetic.
std::vector<cpp_int> reference_stream(const PairSeed& seed, std::uint64_t round, std::uint32_t column,
                                      std::size_t length) {
  std::uint8_t nonce[12];
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(round >> (8 * i));
  for (int i = 0; i < 4; ++i) nonce[8 + i] = static_cast<std::uint8_t>(column >> (8 * i));
  std::vector<std::uint8_t> ks(64 * length);
  crypto_stream_chacha20_ietf(ks.data(), ks.size(), nonce, seed.data());
  std::vector<cpp_int> out;
  for (std::size_t k = 0; k < length; ++k) {
    cpp_int v = 0;
    for (int b = 63; b >= 0; --b) v = (v << 8) | ks[64 * k + static_cast<std::size_t>(b)];
    out.push_back(v % oracle::modulus());
  }
  return out;
}

}  // namespace

TEST(Stream, MatchesReferenceKeystream) {
  ASSERT_GE(sodium_init(), 0);
  Rng rng(seed_from_hex("b0"));
  PairSeed seed;
  rng.fill(seed);
  // Long enough to cross the internal chunk boundary.
  const std::size_t n = 2100;
  const auto got = derive_mask_stream(seed, 0x0102030405060708ull, 9, n);
  const auto want = reference_stream(seed, 0x0102030405060708ull, 9, n);
  ASSERT_EQ(got.size(), n);
  for (std::size_t k = 0; k < n; ++k) {
    ASSERT_EQ(oracle::to_int(got[k]), want[k]) << k;
    ASSERT_LT(oracle::to_int(got[k]), oracle::modulus());
  }
}

TEST(Stream, DeterministicAndSeparated) {
  Rng rng(seed_from_hex("b1"));
  PairSeed seed;
  rng.fill(seed);
  EXPECT_EQ(derive_mask_stream(seed, 1, 0, 8), derive_mask_stream(seed, 1, 0, 8));
  EXPECT_NE(derive_mask_stream(seed, 1, 0, 1)[0], derive_mask_stream(seed, 2, 0, 1)[0]);
  EXPECT_NE(derive_mask_stream(seed, 1, 0, 1)[0], derive_mask_stream(seed, 1, 1, 1)[0]);
  // Prefix property: a shorter stream is a prefix of a longer one.
  const auto a = derive_mask_stream(seed, 3, 3, 5), b = derive_mask_stream(seed, 3, 3, 1500);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(Secrets, ProvisionCoversAllPairs) {
  Rng rng(seed_from_hex("b2"));
  const auto ids = ids_upto(6);
  const auto s = provision(ids, rng);
  EXPECT_EQ(s.size(), 15u);
  for (const auto u : ids)
    for (const auto v : ids)
      if (u != v) EXPECT_EQ(s.find(u, v), s.find(v, u));
  EXPECT_EQ(s.view_for(ids[0]).size(), 5u);
  PairwiseSecrets t;
  EXPECT_THROW(t.insert(Identity{1}, Identity{1}, {}), ConfigurationError);
  t.insert(Identity{1}, Identity{2}, {});
  EXPECT_THROW(t.insert(Identity{2}, Identity{1}, {}), ConfigurationError);
}

TEST(Mask, SingleClientIsUnmasked) {
  Rng rng(seed_from_hex("b3"));
  const auto ids = ids_upto(1);
  const auto x = random_vector(5, rng);
  EXPECT_EQ(mask(x, ids[0], provision(ids, rng), ids, 1, 0), x);
}

TEST(Mask, TwoClientsCancel) {
  Rng rng(seed_from_hex("b4"));
  const auto ids = ids_upto(2);
  const auto s = provision(ids, rng);
  const auto x1 = random_vector(6, rng), x2 = random_vector(6, rng);
  auto m = mask(x1, ids[0], s, ids, 4, 2);
  add_assign(m, mask(x2, ids[1], s, ids, 4, 2));
  auto want = x1;
  add_assign(want, x2);
  EXPECT_EQ(m, want);
}

TEST(Mask, EveryStreamAppearsTwiceWithOppositeSigns) {
  Rng rng(seed_from_hex("b5"));
  const std::size_t d = 32;
  const auto ids = ids_upto(10);
  const auto secrets = provision(ids, rng);
  // coefficient[(pair)] accumulates +1 / -1 from each owner's mask.
  std::map<std::pair<Identity, Identity>, int> coefficient;
  std::vector<FieldVector> masked;
  FieldVector plain_sum(d);
  for (const auto u : ids) {
    const auto x = random_vector(d, rng);
    add_assign(plain_sum, x);
    const auto m = mask(x, u, secrets.view_for(u), ids, 11, 3);
    // Rebuild r_u pair by pair and attribute each stream.
    std::vector<cpp_int> r(d, 0);
    for (const auto v : ids) {
      if (v == u) continue;
      const auto key = std::minmax(u, v);
      const int sign = v > u ? 1 : -1;
      coefficient[{key.first, key.second}] += sign;
      const auto stream = reference_stream(*secrets.find(u, v), 11, 3, d);
      for (std::size_t i = 0; i < d; ++i) r[i] += sign * stream[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      ASSERT_EQ(oracle::to_int(m[i]), oracle::mod(oracle::to_int(x[i]) + r[i]));
    }
    masked.push_back(m);
  }
  EXPECT_EQ(coefficient.size(), 45u);
  for (const auto& [pair, c] : coefficient) EXPECT_EQ(c, 0);
  std::vector<std::span<const FieldScalar>> views(masked.begin(), masked.end());
  EXPECT_EQ(unmask_sum(views, ids.size()), plain_sum);
}

TEST(Mask, RandomizedCancellation) {
  Rng rng(seed_from_hex("b6"));
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = rng.uniform(1, 64), d = rng.uniform(1, 1024);
    const auto ids = ids_upto(n);
    const auto secrets = provision(ids, rng);
    std::vector<FieldVector> masked;
    FieldVector sum(d);
    for (const auto u : ids) {
      const auto x = random_vector(d, rng);
      add_assign(sum, x);
      masked.push_back(mask(x, u, secrets, ids, trial, 0));
    }
    std::vector<std::span<const FieldScalar>> views(masked.begin(), masked.end());
    ASSERT_EQ(unmask_sum(views, n), sum) << n << "x" << d;
  }
}

TEST(Mask, HidingSmokeTest) {
  Rng rng(seed_from_hex("b7"));
  const auto ids = ids_upto(2);
  for (int k = 0; k < 10000; ++k) {
    const auto secrets = provision(ids, rng);
    const FieldVector x{FieldScalar::from_u64(k)};
    ASSERT_NE(mask(x, ids[0], secrets, ids, 1, 0)[0], x[0]);
  }
}

TEST(Mask, Errors) {
  Rng rng(seed_from_hex("b8"));
  const auto ids = ids_upto(3);
  const auto secrets = provision(ids, rng);
  const FieldVector x(4);
  EXPECT_THROW(mask(x, Identity{999}, secrets, ids, 1, 0), ConfigurationError);
  const auto partial = secrets.view_for(ids[1]);
  EXPECT_THROW(mask(x, ids[0], partial.view_for(ids[0]), ids, 1, 0), ConfigurationError);
  std::vector<std::span<const FieldScalar>> one{x};
  EXPECT_THROW(unmask_sum(one, 2), ProtocolError);
  const FieldVector y(5);
  std::vector<std::span<const FieldScalar>> ragged{x, y};
  EXPECT_THROW(unmask_sum(ragged, 2), DimensionError);
  EXPECT_EQ(unmask_sum(one, 1), x);
}

TEST(SecretsFile, RoundTripAndFormat) {
  Rng rng(seed_from_hex("b9"));
  const auto ids = ids_upto(4);
  const auto s = provision(ids, rng);
  const auto path = std::filesystem::temp_directory_path() / "vfl-test-pairwise.bin";
  write_secrets_file(path, s);
  EXPECT_EQ(read_secrets_file(path).records(), s.records());
  std::ifstream in(path, std::ios::binary);
  const std::string raw((std::istreambuf_iterator<char>(in)), {});
  ASSERT_GE(raw.size(), 9u);
  EXPECT_EQ(raw.substr(0, 9), "vfl-pw v1");
  EXPECT_EQ((raw.size() - 9) % 40, 0u);
  EXPECT_EQ((raw.size() - 9) / 40, 6u);
  std::ofstream(path, std::ios::binary) << raw.substr(0, raw.size() - 3);
  EXPECT_THROW(read_secrets_file(path), DeserializationError);
  std::filesystem::remove(path);
}
