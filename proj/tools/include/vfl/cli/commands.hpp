#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "vfl/adversary.hpp"
#include "vfl/cli/config.hpp"
#include "vfl/round.hpp"

namespace vfl::cli {

inline constexpr int kExitAccept = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitReject = 2;
inline constexpr int kExitUndetected = 3;

struct SetupOptions {
  SessionFile session;
  std::filesystem::path out;
  bool force = false;
  std::size_t threads = 1;
};

struct SetupSummary {
  std::size_t key_files = 0;
  std::size_t board_entries = 0;
  std::size_t pairwise_records = 0;
};

// Trusted setup: params, key pairs, pairwise secrets and a populated board
// file under `out`. Refuses to overwrite an existing session without force.
SetupSummary cmd_setup(const SetupOptions& opts);

struct RoundCommandOptions {
  std::filesystem::path dir;
  std::uint64_t round = 1;
  std::optional<adversary::TamperMode> tamper;
  std::size_t threads = 1;
  std::size_t verifiers = 0;
};

struct RoundOutcome {
  protocol::RoundTranscript transcript;
  std::filesystem::path transcript_path;
  int exit_code = kExitAccept;
};

// Loads the setup directory, runs one round and writes its transcript.
RoundOutcome cmd_round(const RoundCommandOptions& opts);

void print_timing_table(std::ostream& os, const protocol::RoundTranscript& t);

struct AdversaryCommandOptions {
  adversary::SuiteOptions suite;
  std::string seed = "00";
};

adversary::DetectionReport cmd_adversary(const AdversaryCommandOptions& opts);

struct SelftestOptions {
  // Mutation smoke test: run with subgroup checks disabled; must fail.
  bool disable_subgroup_checks = false;
  std::size_t threads = 1;
};

// Runs the small-scale invariant suite, printing one line per check.
bool cmd_selftest(const SelftestOptions& opts, std::ostream& log);

}  // namespace vfl::cli
