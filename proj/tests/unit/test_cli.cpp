#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "vfl/board.hpp"
#include "vfl/cli/bench.hpp"
#include "vfl/cli/commands.hpp"
#include "vfl/errors.hpp"

using namespace vfl;
using namespace vfl::cli;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

SetupOptions small_setup(const std::filesystem::path& dir, std::string seed = "c011") {
  SetupOptions o;
  o.session.clients = 4;
  o.session.d = 8;
  o.session.m = 2;
  o.session.seed = std::move(seed);
  o.out = dir;
  return o;
}

std::string strip_durations(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return std::regex_replace(ss.str(), std::regex("\"duration_us\":[0-9]+"), "");
}

}  // namespace

TEST(SessionFile, RoundTripAndErrors) {
  const auto dir = fresh_dir("vfl-test-cfg");
  std::filesystem::create_directories(dir);
  SessionFile s;
  s.d = 9;
  s.m = 3;
  s.dp = 6;
  s.seed = "beef";
  write_session_file(dir / "c.txt", s);
  const auto back = read_session_file(dir / "c.txt");
  EXPECT_EQ(back.d, 9u);
  EXPECT_EQ(back.m, 3u);
  EXPECT_EQ(back.dp, 6);
  EXPECT_EQ(back.seed, "beef");
  EXPECT_EQ(back.session_tag(), s.session_tag());
  std::ofstream(dir / "bad.txt") << "d = 4\ncolour = blue\n";
  EXPECT_THROW(read_session_file(dir / "bad.txt"), ConfigurationError);
  std::ofstream(dir / "bad2.txt") << "d = four\n";
  EXPECT_THROW(read_session_file(dir / "bad2.txt"), ConfigurationError);
  std::filesystem::remove_all(dir);
}

TEST(Setup, ProducesCountedArtifacts) {
  const auto dir = fresh_dir("vfl-test-setup");
  const auto summary = cmd_setup(small_setup(dir));
  EXPECT_EQ(summary.key_files, 4u);
  EXPECT_EQ(summary.board_entries, 4u);
  EXPECT_EQ(summary.pairwise_records, 6u);
  const SetupPaths paths{dir};
  for (std::uint64_t k = 1; k <= 4; ++k) {
    EXPECT_TRUE(std::filesystem::exists(paths.secret_key(Identity{k})));
    EXPECT_TRUE(std::filesystem::exists(paths.verification_key(Identity{k})));
  }
  const auto chain = board::verify_chain(paths.board());
  EXPECT_TRUE(chain.valid);
  EXPECT_EQ(chain.entries, 4u);
  EXPECT_EQ(maskagg::read_secrets_file(paths.secrets()).size(), 6u);
  EXPECT_THROW(cmd_setup(small_setup(dir)), Error);
  auto forced = small_setup(dir);
  forced.force = true;
  EXPECT_NO_THROW(cmd_setup(forced));
  std::filesystem::remove_all(dir);
}

TEST(Round, HonestAndTamperedExitCodes) {
  const auto dir = fresh_dir("vfl-test-round");
  cmd_setup(small_setup(dir));
  RoundCommandOptions o;
  o.dir = dir;
  const auto honest = cmd_round(o);
  EXPECT_EQ(honest.exit_code, kExitAccept);
  EXPECT_TRUE(std::filesystem::exists(honest.transcript_path));
  std::ostringstream table;
  print_timing_table(table, honest.transcript);
  EXPECT_NE(table.str().find("aggregate"), std::string::npos);

  o.tamper = adversary::TamperMode::AddE;
  EXPECT_EQ(cmd_round(o).exit_code, kExitReject);
  o.round = 2;
  o.tamper = adversary::TamperMode::ReplayPreviousRound;
  EXPECT_EQ(cmd_round(o).exit_code, kExitReject);
  std::filesystem::remove_all(dir);
}

TEST(Round, SameSeedSameTranscript) {
  const auto a = fresh_dir("vfl-test-det-a"), b = fresh_dir("vfl-test-det-b"), c = fresh_dir("vfl-test-det-c");
  cmd_setup(small_setup(a));
  cmd_setup(small_setup(b));
  cmd_setup(small_setup(c, "c012"));
  RoundCommandOptions o;
  o.dir = a;
  const auto ta = cmd_round(o).transcript_path;
  o.dir = b;
  o.threads = 2;
  const auto tb = cmd_round(o).transcript_path;
  o.dir = c;
  const auto tc = cmd_round(o).transcript_path;
  EXPECT_EQ(strip_durations(ta), strip_durations(tb));
  EXPECT_NE(strip_durations(ta), strip_durations(tc));
  for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST(Round, TamperedBoardIsRefused) {
  const auto dir = fresh_dir("vfl-test-board-edit");
  cmd_setup(small_setup(dir));
  const SetupPaths paths{dir};
  {
    std::ifstream in(paths.board());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    text[text.find(',') + 5] = text[text.find(',') + 5] == 'a' ? 'b' : 'a';
    std::ofstream(paths.board(), std::ios::trunc) << text;
  }
  RoundCommandOptions o;
  o.dir = dir;
  EXPECT_THROW(cmd_round(o), Error);
  std::filesystem::remove_all(dir);
}

TEST(Bench, RecordsHaveRepetitionsAndStableSizes) {
  BenchOptions o;
  const auto auth = bench_auth({8, 64}, o);
  ASSERT_EQ(auth.size(), 2u);
  for (const auto& r : auth) {
    EXPECT_GE(r.repetitions, kMinRepetitions);
    EXPECT_GT(r.mean_us, 0.0);
    EXPECT_EQ(r.bytes, mklha::Authenticator::kSerializedBytes);
  }
  const auto size = bench_size({4, 400}, o);
  EXPECT_EQ(size[0].bytes, size[1].bytes);
  const auto agg = bench_aggregate_size({2, 4, 8}, o);
  EXPECT_EQ(agg[2].bytes - agg[1].bytes, 2 * (agg[1].bytes - agg[0].bytes));
  std::ostringstream os;
  write_csv_header(os);
  write_csv(os, auth);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "operation,d,m,clients,subcolumns,threads,mean_us,stddev_us,bytes,repetitions");
  EXPECT_NO_THROW(bench_verify({8}, o));
  EXPECT_NO_THROW(bench_mask({8}, o));
  EXPECT_NO_THROW(bench_unmask({8}, o));
  EXPECT_NO_THROW(bench_round({4}, o));
  EXPECT_NO_THROW(bench_eval({2, 3}, o));
}

TEST(Bench, LinearFit) {
  EXPECT_NEAR(linear_r2({1, 2, 3, 4}, {2, 4, 6, 8}), 1.0, 1e-12);
  EXPECT_LT(linear_r2({1, 2, 3, 4}, {1, 4, 1, 4}), 0.5);
  EXPECT_THROW(linear_r2({1}, {1}), InvalidArgument);
}

// Doubling workers should give at least 1.6x auth throughput. Needs real
// cores to mean anything.
TEST(Bench, ThreadScaling) {
  if (std::thread::hardware_concurrency() < 2) GTEST_SKIP() << "single hardware thread";
  BenchOptions o;
  o.d = 4096;
  o.m = 8;
  const auto rows = bench_threads({1, 2}, o);
  EXPECT_GE(rows[0].mean_us / rows[1].mean_us, 1.6);
}
