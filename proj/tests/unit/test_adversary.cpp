#include <gtest/gtest.h>

#include <sstream>

#include "vfl/adversary.hpp"
#include "vfl/errors.hpp"
#include "vfl/round.hpp"

using namespace vfl;
using namespace vfl::adversary;
using protocol::RoundOptions;

namespace {

protocol::SessionConfig config(std::size_t n, std::size_t d, std::size_t m) {
  protocol::SessionConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.bounds = {1.0, static_cast<std::uint32_t>(n)};
  for (std::size_t k = 1; k <= n; ++k) cfg.active.push_back(Identity{k});
  cfg.session_tag = from_hex("616476");
  return cfg;
}

}  // namespace

TEST(Modes, ParseAndPrint) {
  for (const auto mode : kAllModes) {
    EXPECT_EQ(parse_mode(to_string(mode)), mode);
  }
  EXPECT_EQ(parse_mode("add-e"), TamperMode::AddE);
  EXPECT_EQ(parse_mode("replay-previous-round"), TamperMode::ReplayPreviousRound);
  EXPECT_EQ(parse_mode("inject-forged-signer"), TamperMode::InjectForgedSigner);
  EXPECT_THROW(parse_mode("nope"), InvalidArgument);
}

TEST(Apply, ZeroOffsetIsNoTamper) {
  Rng rng(seed_from_hex("e0"));
  auto w = protocol::make_world(config(3, 4, 2), rng);
  RoundOptions o;
  o.tamper = TamperSpec{TamperMode::AddE, FieldVector(4)};
  EXPECT_TRUE(run_round(w, 1, protocol::synthetic_updates(w.cfg, rng), o).accepted());
}

TEST(Apply, EveryModeIsRejectedByEveryVerifier) {
  Rng rng(seed_from_hex("e1"));
  auto w = protocol::make_world(config(4, 5, 3), rng);
  std::uint64_t round = 1;
  // Give the replay mode a previous broadcast.
  ASSERT_TRUE(run_round(w, round++, protocol::synthetic_updates(w.cfg, rng)).accepted());
  for (const auto mode : kAllModes) {
    RoundOptions o;
    o.tamper = TamperSpec{mode};
    const auto t = run_round(w, round++, protocol::synthetic_updates(w.cfg, rng), o);
    ASSERT_EQ(t.verdicts.size(), 4u);
    for (const auto& [id, v] : t.verdicts) EXPECT_FALSE(v.accepted) << to_string(mode) << " " << id.str();
  }
}

TEST(Apply, SpecificRejectReasons) {
  Rng rng(seed_from_hex("e2"));
  auto w = protocol::make_world(config(3, 4, 2), rng);
  const auto check = [&](TamperMode mode, mklha::RejectReason want) {
    RoundOptions o;
    o.tamper = TamperSpec{mode};
    o.tamper->target_column = 1;
    const auto t = run_round(w, 5, protocol::synthetic_updates(w.cfg, rng), o);
    const auto& v = t.verdicts.begin()->second;
    ASSERT_FALSE(v.accepted) << to_string(mode);
    // Omission drops the client from every column, not only the target.
    if (mode != TamperMode::OmitClient) EXPECT_EQ(v.failing_columns(), std::vector<std::size_t>{1}) << to_string(mode);
    EXPECT_EQ(v.reasons[1], want) << to_string(mode);
  };
  check(TamperMode::AddE, mklha::RejectReason::SumCheck);
  check(TamperMode::ReplaceWithE, mklha::RejectReason::SumCheck);
  check(TamperMode::InjectForgedSigner, mklha::RejectReason::KeySetMismatch);
  check(TamperMode::OmitClient, mklha::RejectReason::KeySetMismatch);
  check(TamperMode::WrongKeySet, mklha::RejectReason::IdentityCheck);
}

TEST(Apply, SwapWithSingleColumnDegeneratesToHonest) {
  Rng rng(seed_from_hex("e3"));
  auto w = protocol::make_world(config(2, 3, 1), rng);
  RoundOptions o;
  o.tamper = TamperSpec{TamperMode::SwapColumns};
  EXPECT_TRUE(run_round(w, 1, protocol::synthetic_updates(w.cfg, rng), o).accepted());
}

TEST(Suite, SmallRunDetectsEverythingAndWritesCsv) {
  Rng rng(seed_from_hex("e4"));
  SuiteOptions opts;
  opts.trials = 10;
  opts.verifiers = 0;
  const auto report = detection_suite(opts, rng);
  EXPECT_TRUE(report.all_detected());
  EXPECT_EQ(report.false_rejects, 0u);
  EXPECT_EQ(report.honest_trials, 10u);
  ASSERT_EQ(report.modes.size(), 7u);
  for (const auto& row : report.modes) EXPECT_EQ(row.rate(), 1.0) << row.mode;
  std::ostringstream os;
  report.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "mode,trials,detected,rate");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  EXPECT_EQ(rows, 8u);
}
