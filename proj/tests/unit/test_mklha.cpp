#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "vfl/errors.hpp"
#include "vfl/mklha.hpp"

using namespace vfl;
using namespace vfl::mklha;

namespace {

const Bytes kTag = from_hex("0102030405060708");

FieldVector random_vector(std::size_t d, Rng& rng) {
  FieldVector x(d);
  for (auto& v : x) v = rng.field();
  return x;
}

// Everything a test needs for one column: params, keys and honest inputs.
struct Fixture {
  PublicParams pp;
  std::vector<KeyPair> keys;
  std::map<Identity, VerificationKey> vks;
  Label label;
  std::map<Identity, FieldVector> xs;
  std::map<Identity, Authenticator> sigmas;
  FieldVector sum;
};

Fixture make_fixture(std::size_t n, std::size_t d, Rng& rng) {
  Fixture f{setup(128, d, kTag), {}, {}, {kTag, 7, 2}, {}, {}, FieldVector(d)};
  for (std::size_t k = 1; k <= n; ++k) {
    f.keys.push_back(keygen(f.pp, Identity{k * 10}, rng));
    const auto& kp = f.keys.back();
    f.vks.emplace(kp.id, kp.vk);
    f.xs[kp.id] = random_vector(d, rng);
    add_assign(f.sum, f.xs[kp.id]);
    f.sigmas.emplace(kp.id, auth(f.pp, kp.sk, f.label, f.xs[kp.id], rng));
  }
  return f;
}

}  // namespace

TEST(Setup, DeterministicAndDomainSeparated) {
  const auto a = setup(128, 4, kTag), b = setup(128, 4, kTag);
  EXPECT_EQ(a.digest(), b.digest());
  const auto c = setup(128, 4, from_hex("ff"));
  EXPECT_NE(a.slot(0), c.slot(0));
  EXPECT_THROW(setup(80, 4, kTag), ConfigurationError);
  EXPECT_THROW(setup(128, 0, kTag), InvalidArgument);
}

TEST(Setup, GeneratorsPairwiseDistinct) {
  const auto pp = setup(128, 16, kTag);
  std::vector<G1> all{G1::generator(), pp.blind()};
  for (std::size_t i = 0; i < pp.dimension(); ++i) all.push_back(pp.slot(i));
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_FALSE(all[i].is_identity());
    EXPECT_TRUE(all[i].in_group());
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i], all[j]) << i << "," << j;
  }
}

TEST(Setup, PrefixEqualsShorterSetup) {
  const auto big = setup(128, 12, kTag);
  const auto small = setup(128, 5, kTag);
  EXPECT_EQ(big.prefix(5).digest(), small.digest());
  EXPECT_THROW(big.prefix(13), DimensionError);
}

TEST(Keygen, PairingConsistency) {
  const auto pp = setup(128, 2, kTag);
  Rng rng(seed_from_hex("a0"));
  const auto kp = keygen(pp, Identity{1}, rng);
  EXPECT_EQ(kp.vk.point, G2::generator() * kp.sk.scalar());
  EXPECT_EQ(pairing(G1::generator() * kp.sk.scalar(), G2::generator()), pairing(G1::generator(), kp.vk.point));
  const auto kp2 = keygen(pp, Identity{2}, rng);
  EXPECT_NE(kp.vk, kp2.vk);
  EXPECT_THROW(SecretKey(FieldScalar::zero()), KeyGenerationError);
}

TEST(Auth, MatchesDirectComputation) {
  Rng rng(seed_from_hex("a1"));
  const auto pp = setup(128, 6, kTag);
  const auto kp = keygen(pp, Identity{3}, rng);
  const Label label{kTag, 4, 1};
  const FieldVector x = random_vector(6, rng);
  const FieldScalar r = rng.nonzero_field();
  const auto sigma = auth_with_randomness(pp, kp.sk, label, x, r, {3, 2});

  // Re-derive every generator and fold the commitment term by term.
  ByteWriter w;
  w.raw(as_bytes("blind"));
  w.u64(kTag.size());
  w.raw(kTag);
  G1 commit = G1::hash(w.bytes(), kBlindTag) * r;
  EXPECT_EQ(G1::hash(w.bytes(), kBlindTag), pp.blind());
  for (std::size_t i = 0; i < x.size(); ++i) commit += pp.slot(i) * x[i];
  EXPECT_EQ(sigma.commit, commit);
  EXPECT_EQ(sigma.lambda, (label.hash() + commit) * kp.sk.scalar());
  EXPECT_EQ(sigma.s, G2::generator() * r);
  EXPECT_TRUE(verify_single(pp, kp.vk, label, sigma));
}

TEST(Auth, ZeroVectorWithZeroRandomness) {
  Rng rng(seed_from_hex("a2"));
  const auto pp = setup(128, 3, kTag);
  const auto kp = keygen(pp, Identity{1}, rng);
  const Label label{kTag, 1, 0};
  const FieldVector zero(3);
  const auto sigma = auth_with_randomness(pp, kp.sk, label, zero, FieldScalar::zero());
  EXPECT_TRUE(sigma.commit.is_identity());
  EXPECT_TRUE(sigma.s.is_identity());
  EXPECT_EQ(sigma.lambda, label.hash() * kp.sk.scalar());
  const std::map<Identity, VerificationKey> vks{{kp.id, kp.vk}};
  EXPECT_TRUE(verify(pp, vks, label, zero, eval(pp, {{kp.id, sigma}})));
}

TEST(Auth, RandomizedCommitments) {
  Rng rng(seed_from_hex("a3"));
  const auto pp = setup(128, 2, kTag);
  const auto kp = keygen(pp, Identity{1}, rng);
  const Label label{kTag, 1, 0};
  const FieldVector x = random_vector(2, rng);
  std::set<std::string> commits, ss;
  for (int k = 0; k < 1000; ++k) {
    const auto sigma = auth(pp, kp.sk, label, x, rng);
    const auto c = sigma.commit.compress();
    const auto s = sigma.s.compress();
    commits.insert(std::string(c.begin(), c.end()));
    ss.insert(std::string(s.begin(), s.end()));
  }
  EXPECT_EQ(commits.size(), 1000u);
  EXPECT_EQ(ss.size(), 1000u);
  EXPECT_THROW(auth(pp, kp.sk, label, FieldVector(3), rng), DimensionError);
}

TEST(VerifySingle, RejectsTamperingAndForeignKeys) {
  Rng rng(seed_from_hex("a4"));
  auto f = make_fixture(2, 4, rng);
  for (auto& [id, sigma] : f.sigmas) {
    EXPECT_TRUE(verify_single(f.pp, f.vks.at(id), f.label, sigma));
    Authenticator bad = sigma;
    bad.lambda += G1::generator();
    EXPECT_FALSE(verify_single(f.pp, f.vks.at(id), f.label, bad));
    EXPECT_FALSE(verify_single(f.pp, f.vks.at(id), Label{kTag, 8, 2}, sigma));
  }
  EXPECT_FALSE(verify_single(f.pp, f.keys[1].vk, f.label, f.sigmas.at(f.keys[0].id)));
}

TEST(Eval, SingletonAndOrderIndependence) {
  Rng rng(seed_from_hex("a5"));
  auto f = make_fixture(3, 2, rng);
  const auto& [id0, s0] = *f.sigmas.begin();
  const auto single = eval(f.pp, {{id0, s0}});
  EXPECT_EQ(single.s_agg, s0.s);
  ASSERT_EQ(single.per_identity.size(), 1u);
  EXPECT_EQ(single.per_identity.at(id0).lambda, s0.lambda);

  const auto all = eval(f.pp, f.sigmas);
  G2 reversed;
  for (auto it = f.sigmas.rbegin(); it != f.sigmas.rend(); ++it) reversed += it->second.s;
  EXPECT_EQ(all.s_agg, reversed);
  EXPECT_THROW(eval(f.pp, {}), InvalidArgument);
}

TEST(Eval, DisjointUnionComposes) {
  Rng rng(seed_from_hex("a6"));
  auto f = make_fixture(4, 2, rng);
  std::map<Identity, Authenticator> a, b;
  std::size_t k = 0;
  for (const auto& kv : f.sigmas) (k++ < 2 ? a : b).insert(kv);
  EXPECT_EQ(eval(f.pp, f.sigmas).s_agg, eval(f.pp, a).s_agg + eval(f.pp, b).s_agg);
}

TEST(Verify, HonestPipelineAcceptsInBothModes) {
  Rng rng(seed_from_hex("a7"));
  auto f = make_fixture(3, 4, rng);
  const auto agg = eval(f.pp, f.sigmas);
  VerifyOptions strict;
  strict.mode = VerifyMode::Strict;
  EXPECT_TRUE(verify(f.pp, f.vks, f.label, f.sum, agg));
  EXPECT_TRUE(verify(f.pp, f.vks, f.label, f.sum, agg, strict));
  VerifyOptions par;
  par.par = {3, 2};
  EXPECT_TRUE(verify(f.pp, f.vks, f.label, f.sum, agg, par));

  // Both pairing sides of each equation, recomputed from known exponents.
  G1 commit_total;
  for (const auto& [id, comp] : agg.per_identity) {
    const auto& kp = *std::find_if(f.keys.begin(), f.keys.end(), [&](const KeyPair& k) { return k.id == id; });
    EXPECT_EQ(pairing(comp.lambda, G2::generator()), pairing(f.label.hash() + comp.commit, kp.vk.point));
    commit_total += comp.commit;
  }
  G1 slots;
  for (std::size_t i = 0; i < f.sum.size(); ++i) slots += f.pp.slot(i) * f.sum[i];
  EXPECT_EQ(pairing(commit_total - slots, G2::generator()), pairing(f.pp.blind(), agg.s_agg));
}

TEST(Verify, RandomizedCorrectness) {
  Rng rng(seed_from_hex("a8"));
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = rng.uniform(1, 64), d = rng.uniform(1, 256);
    auto f = make_fixture(n, d, rng);
    ASSERT_TRUE(verify(f.pp, f.vks, f.label, f.sum, eval(f.pp, f.sigmas))) << n << "x" << d;
  }
}

TEST(Verify, AnyOffsetOnTheSumIsRejected) {
  Rng rng(seed_from_hex("a9"));
  auto f = make_fixture(3, 4, rng);
  const auto agg = eval(f.pp, f.sigmas);
  for (int k = 0; k < 100; ++k) {
    FieldVector e = random_vector(4, rng);
    if (std::all_of(e.begin(), e.end(), [](const FieldScalar& v) { return v.is_zero(); })) continue;
    FieldVector bad = f.sum;
    add_assign(bad, e);
    const auto res = verify(f.pp, f.vks, f.label, bad, agg);
    ASSERT_FALSE(res);
    EXPECT_EQ(res.reason, RejectReason::SumCheck);
  }
}

TEST(Verify, KeySetBinding) {
  Rng rng(seed_from_hex("aa"));
  auto f = make_fixture(3, 2, rng);
  const auto agg = eval(f.pp, f.sigmas);
  for (const auto& [id, vk] : f.vks) {
    auto swapped = f.vks;
    swapped[id] = keygen(f.pp, id, rng).vk;
    const auto res = verify(f.pp, swapped, f.label, f.sum, agg);
    EXPECT_FALSE(res);
    EXPECT_EQ(res.reason, RejectReason::IdentityCheck);
  }
  auto missing = f.vks;
  missing.erase(missing.begin());
  EXPECT_EQ(verify(f.pp, missing, f.label, f.sum, agg).reason, RejectReason::KeySetMismatch);
  auto extra = f.vks;
  extra[Identity{999}] = keygen(f.pp, Identity{999}, rng).vk;
  EXPECT_EQ(verify(f.pp, extra, f.label, f.sum, agg).reason, RejectReason::KeySetMismatch);
}

TEST(Verify, StrictModeNamesTheForger) {
  Rng rng(seed_from_hex("ab"));
  auto f = make_fixture(3, 2, rng);
  auto agg = eval(f.pp, f.sigmas);
  const Identity victim = f.keys[1].id;
  agg.per_identity[victim].lambda += G1::generator();
  VerifyOptions strict;
  strict.mode = VerifyMode::Strict;
  const auto res = verify(f.pp, f.vks, f.label, f.sum, agg, strict);
  EXPECT_EQ(res.reason, RejectReason::IdentityCheck);
  EXPECT_EQ(res.failing_identities, std::vector<Identity>{victim});
  EXPECT_FALSE(verify(f.pp, f.vks, f.label, f.sum, agg));
  EXPECT_FALSE(verify(f.pp, f.vks, Label{kTag, 8, 2}, f.sum, eval(f.pp, f.sigmas)));
  EXPECT_THROW(verify(f.pp, f.vks, f.label, FieldVector(3), agg), DimensionError);
}

TEST(Serialization, RoundTripAndConstantSize) {
  Rng rng(seed_from_hex("ac"));
  auto f = make_fixture(3, 8, rng);
  for (int k = 0; k < 100; ++k) {
    const auto sigma = auth(f.pp, f.keys[0].sk, f.label, f.xs.begin()->second, rng);
    const Bytes wire = serialize(sigma);
    ASSERT_EQ(wire.size(), Authenticator::kSerializedBytes);
    ASSERT_EQ(deserialize_authenticator(wire), sigma);
  }
  const auto agg = eval(f.pp, f.sigmas);
  EXPECT_EQ(deserialize_aggregated(serialize(agg)), agg);

  const auto small = setup(128, 10, kTag);
  Rng r2(seed_from_hex("ad"));
  const auto kp = keygen(small, Identity{1}, r2);
  const auto s10 = serialize(auth(small, kp.sk, f.label, random_vector(10, r2), r2));
  const auto big = setup(128, 100000, kTag, 1);
  const auto s100k = serialize(auth(big, kp.sk, f.label, random_vector(100000, r2), r2));
  EXPECT_EQ(s10.size(), s100k.size());
}

TEST(Serialization, MalformedInputThrows) {
  Rng rng(seed_from_hex("ae"));
  auto f = make_fixture(1, 2, rng);
  const Bytes wire = serialize(f.sigmas.begin()->second);
  for (std::size_t cut : {0u, 1u, 47u, 100u, 191u}) {
    EXPECT_THROW(deserialize_authenticator(ByteView(wire.data(), cut)), DeserializationError);
  }
  Bytes longer = wire;
  longer.push_back(0);
  EXPECT_THROW(deserialize_authenticator(longer), DeserializationError);
  Bytes off = wire;
  const auto bad = vfl::testing::off_subgroup_g1_point();
  std::copy(bad.begin(), bad.end(), off.begin());
  EXPECT_THROW(deserialize_authenticator(off), DeserializationError);
  const Bytes agg = serialize(eval(f.pp, f.sigmas));
  EXPECT_THROW(deserialize_aggregated(ByteView(agg.data(), agg.size() - 1)), DeserializationError);
}

TEST(KeyFiles, RoundTrip) {
  Rng rng(seed_from_hex("af"));
  const auto pp = setup(128, 1, kTag);
  const auto dir = std::filesystem::temp_directory_path() / "vfl-test-keys";
  std::filesystem::create_directories(dir);
  const auto a = keygen(pp, Identity{5}, rng), b = keygen(pp, Identity{6}, rng);
  const std::vector<VerificationKey> vks{a.vk, b.vk};
  write_verification_keys(dir / "k.vk", vks);
  EXPECT_EQ(read_verification_keys(dir / "k.vk"), vks);
  write_secret_key(dir / "k.sk", a.id, a.sk);
  const auto back = read_secret_key(dir / "k.sk");
  EXPECT_EQ(back.id, a.id);
  EXPECT_EQ(back.vk, a.vk);
  EXPECT_EQ(std::filesystem::status(dir / "k.sk").permissions() & std::filesystem::perms::group_read,
            std::filesystem::perms::none);
  std::ofstream(dir / "bad.vk") << "vfl-vk v1 BLS12-381\nzz\n";
  EXPECT_THROW(read_verification_keys(dir / "bad.vk"), DeserializationError);
  std::filesystem::remove_all(dir);
}
