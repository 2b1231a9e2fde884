#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfl/mklha.hpp"
#include "vfl/protocol.hpp"
#include "vfl/rng.hpp"

namespace vfl::adversary {

enum class TamperMode {
  AddE,                 // x'_j = x_j + e
  ReplaceWithE,         // x'_j = e
  InjectForgedSigner,   // add e under a fresh key that is not on the board
  OmitClient,           // drop one client's authenticator, keep claiming S
  WrongKeySet,          // one identity's components re-signed under a foreign key
  ReplayPreviousRound,  // resend last round's aggregate as this round's
  SwapColumns,          // exchange two columns together with their authenticators
};

inline constexpr TamperMode kAllModes[] = {
    TamperMode::AddE,        TamperMode::ReplaceWithE,        TamperMode::InjectForgedSigner,
    TamperMode::OmitClient,  TamperMode::WrongKeySet,         TamperMode::ReplayPreviousRound,
    TamperMode::SwapColumns,
};

std::string_view to_string(TamperMode mode);
// Accepts "add-e", "AddE", ... Throws InvalidArgument otherwise.
TamperMode parse_mode(std::string_view name);

struct TamperSpec {
  TamperMode mode = TamperMode::AddE;
  // Injected vector for AddE / ReplaceWithE / InjectForgedSigner / WrongKeySet
  // (length d). Random nonzero when absent.
  std::optional<FieldVector> e;
  std::optional<Identity> target_client;
  std::optional<std::size_t> target_column;
  // SwapColumns partner; defaults to (target_column + 1) mod m.
  std::optional<std::size_t> second_column;
};

// Public material an aggregator legitimately holds: the updates it received,
// earlier broadcasts, and keys it generated itself. No honest secrets.
struct AdversaryView {
  std::span<const protocol::ClientUpdate> updates;
  const protocol::AggregateResult* previous = nullptr;
  Rng* rng = nullptr;
};

// Returns the manipulated broadcast. Always well-formed; degenerate
// parameters (e = 0, a single column to swap, no previous round) degrade to
// the honest result.
protocol::AggregateResult apply(const TamperSpec& spec, const protocol::SessionConfig& cfg,
                                const mklha::PublicParams& pp, const protocol::AggregateResult& honest,
                                const AdversaryView& view);

struct DetectionRow {
  std::string mode;
  std::size_t trials = 0;
  std::size_t detected = 0;
  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(detected) / trials; }
};

struct DetectionReport {
  std::vector<DetectionRow> modes;
  // Honest control rounds and how many of them were (wrongly) rejected.
  std::size_t honest_trials = 0;
  std::size_t false_rejects = 0;

  bool all_detected() const;
  // CSV with header "mode,trials,detected,rate"; the honest control appears
  // as mode "honest" with detected = false rejects.
  void write_csv(std::ostream& os) const;
};

struct SuiteOptions {
  std::size_t trials = 200;
  std::size_t max_clients = 5;
  std::size_t max_d = 16;
  std::size_t max_m = 4;
  std::size_t workers = 1;
  // Number of clients that verify each round (0 = every active client).
  std::size_t verifiers = 1;
  std::vector<TamperMode> modes{std::begin(kAllModes), std::end(kAllModes)};
};

// Runs `trials` randomized rounds per mode plus as many honest controls.
DetectionReport detection_suite(const SuiteOptions& opts, Rng& rng);

}  // namespace vfl::adversary
