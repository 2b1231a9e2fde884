#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracle.hpp"
#include "vfl/errors.hpp"
#include "vfl/round.hpp"

using namespace vfl;
using namespace vfl::protocol;
using oracle::cpp_int;
using oracle::cpp_rational;

namespace {

SessionConfig config(std::size_t n, std::size_t d, std::size_t m, std::size_t sub = 1) {
  SessionConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.bounds = {1.0, static_cast<std::uint32_t>(n)};
  for (std::size_t k = 1; k <= n; ++k) cfg.active.push_back(Identity{k});
  cfg.session_tag = from_hex("70726f746f");
  cfg.subcolumns = sub;
  cfg.workers = 2;
  return cfg;
}

std::vector<ClientUpdate> prepare_all(World& w, std::uint64_t round, const std::map<Identity, RealMatrix>& plain) {
  std::vector<ClientUpdate> out;
  for (auto& c : w.clients) out.push_back(client_prepare(w.cfg, w.pp, c, plain.at(c.id), round));
  return out;
}

std::map<Identity, mklha::VerificationKey> snapshot(const World& w) { return w.board->snapshot(w.cfg.active); }

}  // namespace

TEST(SessionConfig, Validation) {
  auto cfg = config(2, 2, 2);
  EXPECT_NO_THROW(cfg.validate());
  auto dup = cfg;
  dup.active.push_back(Identity{1});
  EXPECT_THROW(dup.validate(), ConfigurationError);
  auto empty = cfg;
  empty.active.clear();
  EXPECT_THROW(empty.validate(), ConfigurationError);
  auto zero = cfg;
  zero.m = 0;
  EXPECT_THROW(zero.validate(), ConfigurationError);
  auto other = cfg;
  other.workers = 7;
  EXPECT_EQ(other.hash(), cfg.hash());
  other.subcolumns = 2;
  EXPECT_NE(other.hash(), cfg.hash());
}

TEST(Prepare, ShapeAndSingleClient) {
  Rng rng(seed_from_hex("d0"));
  auto w = make_world(config(1, 5, 3), rng);
  const auto plain = synthetic_updates(w.cfg, rng);
  const auto up = client_prepare(w.cfg, w.pp, w.clients[0], plain.at(Identity{1}), 1);
  EXPECT_EQ(up.authenticators.size(), 3u);
  EXPECT_EQ(up.masked.entries.rows(), 5u);
  EXPECT_EQ(up.masked.entries.cols(), 3u);
  const Codec codec = w.cfg.codec();
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(up.masked.entries(i, j), codec.encode(plain.at(Identity{1})(i, j)));
  const std::vector<ClientUpdate> ups{up};
  const auto res = aggregate(w.cfg, w.pp, ups);
  const auto v = client_verify(w.cfg, w.pp, snapshot(w), res, 1);
  ASSERT_TRUE(v.accepted);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 5; ++i)
      EXPECT_EQ((*v.model)(i, j), codec.decode(codec.encode(plain.at(Identity{1})(i, j))));
}

TEST(Prepare, RejectsOutOfBoundsBeforeSending) {
  Rng rng(seed_from_hex("d1"));
  auto w = make_world(config(2, 2, 1), rng);
  RealMatrix bad(2, 1);
  bad(1, 0) = 3.0;
  EXPECT_THROW(client_prepare(w.cfg, w.pp, w.clients[0], bad, 1), EncodingOverflow);
  EXPECT_THROW(client_prepare(w.cfg, w.pp, w.clients[0], RealMatrix(3, 1), 1), DimensionError);
}

TEST(Aggregate, MatchesUnmaskedOracleAndIsOrderIndependent) {
  Rng rng(seed_from_hex("d2"));
  auto w = make_world(config(5, 8, 2, 2), rng);
  const auto plain = synthetic_updates(w.cfg, rng);
  auto ups = prepare_all(w, 3, plain);
  const auto res = aggregate(w.cfg, w.pp, ups);
  const Codec codec = w.cfg.codec();
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < 8; ++i) {
      cpp_int sum = 0;
      for (const auto& [id, mat] : plain) sum += oracle::round_fixed(mat(i, j), 4);
      EXPECT_EQ(oracle::to_int(res.x_agg(i, j)), oracle::mod(sum));
    }
  }
  std::reverse(ups.begin(), ups.end());
  const auto again = aggregate(w.cfg, w.pp, ups);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(again.sigma_agg[j], res.sigma_agg[j]);
  EXPECT_EQ(again.x_agg.column(0)[0], res.x_agg.column(0)[0]);
}

TEST(Aggregate, InversePairSumsToZero) {
  Rng rng(seed_from_hex("d3"));
  auto w = make_world(config(2, 4, 2), rng);
  auto plain = synthetic_updates(w.cfg, rng);
  auto& b = plain.at(Identity{2});
  const auto& a = plain.at(Identity{1});
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 4; ++i) b(i, j) = -a(i, j);
  const auto ups = prepare_all(w, 1, plain);
  const auto res = aggregate(w.cfg, w.pp, ups);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(res.x_agg(i, j).is_zero());
  const auto v = client_verify(w.cfg, w.pp, snapshot(w), res, 1);
  ASSERT_TRUE(v.accepted);
  EXPECT_EQ((*v.model)(0, 0), 0.0);
}

TEST(Aggregate, AbortsOnMalformedInput) {
  Rng rng(seed_from_hex("d4"));
  auto w = make_world(config(3, 2, 2), rng);
  const auto plain = synthetic_updates(w.cfg, rng);
  const auto ups = prepare_all(w, 2, plain);
  {
    std::vector<ClientUpdate> missing(ups.begin(), ups.end() - 1);
    EXPECT_THROW(aggregate(w.cfg, w.pp, missing), ProtocolError);
  }
  {
    auto dup = ups;
    dup[2] = dup[1];
    EXPECT_THROW(aggregate(w.cfg, w.pp, dup), ProtocolError);
  }
  {
    auto wrong = ups;
    wrong[0].config_hash[0] ^= 1;
    EXPECT_THROW(aggregate(w.cfg, w.pp, wrong), ProtocolError);
  }
  {
    auto wrong = ups;
    wrong[1].round = 9;
    EXPECT_THROW(aggregate(w.cfg, w.pp, wrong), ProtocolError);
  }
  {
    auto wrong = ups;
    wrong[1].authenticators.pop_back();
    EXPECT_THROW(aggregate(w.cfg, w.pp, wrong), ProtocolError);
  }
  {
    auto foreign = ups;
    foreign[0].owner = Identity{77};
    foreign[0].masked.owner = Identity{77};
    EXPECT_THROW(aggregate(w.cfg, w.pp, foreign), ProtocolError);
  }
}

TEST(Verify, HonestRoundMatchesRationalMean) {
  Rng rng(seed_from_hex("d5"));
  auto w = make_world(config(3, 8, 2), rng);
  const auto plain = synthetic_updates(w.cfg, rng);
  const auto res = aggregate(w.cfg, w.pp, prepare_all(w, 1, plain));
  for (const auto& c : w.clients) {
    const auto v = client_verify(w.cfg, w.pp, snapshot(w), res, 1);
    ASSERT_TRUE(v.accepted) << c.id.str();
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t i = 0; i < 8; ++i) {
        cpp_int sum = 0;
        cpp_rational exact_mean = 0;
        for (const auto& [id, mat] : plain) {
          sum += oracle::round_fixed(mat(i, j), 4);
          exact_mean += oracle::exact(mat(i, j));
        }
        const cpp_rational mean(sum, cpp_int(3 * 10000));
        EXPECT_EQ((*v.model)(i, j), oracle::nearest_double(mean));
        EXPECT_LE(std::abs((*v.model)(i, j) - static_cast<double>(exact_mean / 3)), 1e-4);
      }
    }
  }
}

TEST(Verify, FlippedEntryFlagsExactlyThatColumn) {
  Rng rng(seed_from_hex("d6"));
  auto w = make_world(config(3, 4, 4), rng);
  const auto plain = synthetic_updates(w.cfg, rng);
  const auto res = aggregate(w.cfg, w.pp, prepare_all(w, 1, plain));
  for (int trial = 0; trial < 8; ++trial) {
    auto bad = res;
    const std::size_t col = rng.uniform(0, 3), row = rng.uniform(0, 3);
    bad.x_agg(row, col) += FieldScalar::one();
    const auto v = client_verify(w.cfg, w.pp, snapshot(w), bad, 1);
    EXPECT_FALSE(v.accepted);
    EXPECT_FALSE(v.model.has_value());
    EXPECT_EQ(v.failing_columns(), std::vector<std::size_t>{col});
  }
}

TEST(Verify, WrongRoundAndMissingKeys) {
  Rng rng(seed_from_hex("d7"));
  auto w = make_world(config(2, 2, 2), rng);
  const auto res = aggregate(w.cfg, w.pp, prepare_all(w, 4, synthetic_updates(w.cfg, rng)));
  EXPECT_TRUE(client_verify(w.cfg, w.pp, snapshot(w), res, 4).accepted);
  EXPECT_FALSE(client_verify(w.cfg, w.pp, snapshot(w), res, 5).accepted);
  auto partial = snapshot(w);
  partial.erase(Identity{2});
  EXPECT_THROW(client_verify(w.cfg, w.pp, partial, res, 4), MissingKeyError);
}

TEST(Wire, RoundTrip) {
  Rng rng(seed_from_hex("d8"));
  auto w = make_world(config(2, 3, 2), rng);
  const auto ups = prepare_all(w, 1, synthetic_updates(w.cfg, rng));
  const auto back = deserialize_client_update(serialize(ups[0]));
  EXPECT_EQ(back.authenticators, ups[0].authenticators);
  EXPECT_EQ(back.owner, ups[0].owner);
  EXPECT_EQ(back.config_hash, ups[0].config_hash);
  EXPECT_EQ(back.masked.entries.column(1)[2], ups[0].masked.entries.column(1)[2]);
  const auto res = aggregate(w.cfg, w.pp, ups);
  const Bytes wire = serialize(res);
  const auto r2 = deserialize_aggregate_result(wire);
  EXPECT_EQ(r2.sigma_agg, res.sigma_agg);
  EXPECT_EQ(r2.active, res.active);
  EXPECT_EQ(serialize(r2), wire);
  EXPECT_THROW(deserialize_aggregate_result(ByteView(wire.data(), wire.size() - 5)), DeserializationError);
}

TEST(Round, HonestRoundsAccept) {
  Rng rng(seed_from_hex("d9"));
  auto w = make_world(config(4, 6, 3, 2), rng);
  for (std::uint64_t r = 1; r <= 3; ++r) {
    const auto t = run_round(w, r, synthetic_updates(w.cfg, rng));
    EXPECT_TRUE(t.accepted());
    EXPECT_EQ(t.verdicts.size(), 4u);
  }
  RoundOptions o;
  o.tamper = adversary::TamperSpec{adversary::TamperMode::AddE};
  EXPECT_FALSE(run_round(w, 4, synthetic_updates(w.cfg, rng), o).accepted());
}

TEST(Round, TranscriptSchemaAndSizes) {
  Rng rng(seed_from_hex("da"));
  auto small = make_world(config(3, 4, 2), rng);
  auto big = make_world(config(3, 64, 2), rng);
  auto wide = make_world(config(3, 4, 5), rng);
  const auto ts = run_round(small, 1, synthetic_updates(small.cfg, rng));
  const auto tb = run_round(big, 1, synthetic_updates(big.cfg, rng));
  const auto tw = run_round(wide, 1, synthetic_updates(wide.cfg, rng));
  std::ostringstream os;
  ts.write_jsonl(os);
  std::istringstream is(os.str());
  std::size_t lines = 0;
  for (std::string line; std::getline(is, line); ++lines) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"phase", "sender", "receiver", "bytes", "duration_us", "payload_hash"})
      ASSERT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["payload_hash"].get<std::string>().size(), 64u);
  }
  EXPECT_EQ(lines, ts.messages.size());
  const auto upload = [](const RoundTranscript& t) {
    for (const auto& m : t.messages)
      if (m.phase == "prepare") return m.bytes;
    return std::size_t{0};
  };
  // Upload grows with d*m; the authenticator part grows with m only.
  EXPECT_EQ(upload(tb) - upload(ts), 2 * 60 * FieldScalar::kBytes);
  EXPECT_EQ(upload(tw) - upload(ts), 3 * 4 * FieldScalar::kBytes + 3 * mklha::Authenticator::kSerializedBytes);
}
