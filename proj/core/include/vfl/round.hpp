#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfl/adversary.hpp"
#include "vfl/board.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"
#include "vfl/protocol.hpp"

namespace vfl::protocol {

// Phase-0 output plus per-client state: everything needed to run rounds.
struct World {
  SessionConfig cfg;
  mklha::PublicParams pp;
  std::vector<ClientState> clients;
  std::shared_ptr<board::BulletinBoard> board;
  Rng aggregator_rng;
  // Last broadcast, available to a replaying adversary.
  std::optional<AggregateResult> last_result;
};

// Trusted setup for an in-process session: params, keys, pairwise secrets,
// board registration. Deterministic given `rng`.
World make_world(SessionConfig cfg, Rng& rng, std::shared_ptr<board::BulletinBoard> board = nullptr);

struct MessageRecord {
  std::string phase;
  std::string sender;
  std::string receiver;
  std::size_t bytes = 0;
  std::int64_t duration_us = 0;
  std::string payload_hash;
};

struct RoundOptions {
  std::optional<adversary::TamperSpec> tamper;
  // 0 = every active client verifies.
  std::size_t verifiers = 0;
  // Stop after the broadcast (used to stage a previous round for replay).
  bool skip_verification = false;
  mklha::VerifyMode verify_mode = mklha::VerifyMode::Batch;
};

struct RoundTranscript {
  std::uint64_t round = 0;
  std::vector<MessageRecord> messages;
  std::map<Identity, Verdict> verdicts;
  std::optional<AggregateResult> result;
  std::int64_t prepare_us = 0;
  std::int64_t aggregate_us = 0;
  std::int64_t verify_us = 0;

  // Accepted iff at least one client verified and every verifier accepted.
  bool accepted() const;
  // One JSON object per line with fields phase, sender, receiver, bytes,
  // duration_us, payload_hash.
  void write_jsonl(std::ostream& os) const;
};

// Phases 1-3 for one round. `plain` holds each active client's d x m update.
// A tampered round ends in a reject verdict; only misuse throws.
RoundTranscript run_round(World& world, std::uint64_t round,
                          const std::map<Identity, RealMatrix>& plain, const RoundOptions& opts = {});

// Uniform reals in [-bound, bound] for every active client.
std::map<Identity, RealMatrix> synthetic_updates(const SessionConfig& cfg, Rng& rng, double bound = 1.0);

}  // namespace vfl::protocol
