#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vfl/bytes.hpp"
#include "vfl/codec.hpp"
#include "vfl/field.hpp"
#include "vfl/identity.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/matrix.hpp"
#include "vfl/mklha.hpp"
#include "vfl/rng.hpp"

namespace vfl::protocol {

using RealMatrix = Matrix<double>;
using FieldMatrix = Matrix<FieldScalar>;

// Parameters every party must hold identically. `workers` is a local
// execution knob and is not part of the agreed configuration hash.
struct SessionConfig {
  std::size_t d = 1;
  std::size_t m = 1;
  Precision precision;
  EncodingBounds bounds;
  std::vector<Identity> active;
  Bytes session_tag;
  std::size_t subcolumns = 1;
  std::size_t workers = 1;

  // Throws ConfigurationError on empty or duplicate active set, zero d/m/subcolumns.
  void validate() const;
  Digest hash() const;
  Codec codec() const { return Codec(precision, bounds); }
  mklha::Label label(std::uint64_t round, std::uint64_t column) const {
    return {session_tag, round, column};
  }
};

struct MaskedMatrix {
  FieldMatrix entries;
  std::uint64_t round = 0;
  Identity owner;
};

// Client -> aggregator message. Authenticator j covers the plain encoded
// column j; only the masked matrix carries values.
struct ClientUpdate {
  MaskedMatrix masked;
  std::vector<mklha::Authenticator> authenticators;
  Identity owner;
  std::uint64_t round = 0;
  Digest config_hash{};
};

// Aggregator -> clients broadcast.
struct AggregateResult {
  FieldMatrix x_agg;
  std::vector<mklha::AggregatedAuthenticator> sigma_agg;
  std::uint64_t round = 0;
  std::vector<Identity> active;
};

struct Verdict {
  std::vector<bool> column_ok;
  bool accepted = false;
  std::vector<mklha::RejectReason> reasons;
  // Averaged model, present only when every column verified.
  std::optional<RealMatrix> model;

  std::vector<std::size_t> failing_columns() const;
};

// Everything a client keeps across rounds. Never handed to the aggregator.
struct ClientState {
  Identity id;
  mklha::SecretKey sk;
  maskagg::PairwiseSecrets secrets;
  Rng rng;
};

// Phase 1. Encodes, masks every column and authenticates the plain encoded
// columns. Throws EncodingOverflow / DimensionError before producing output.
ClientUpdate client_prepare(const SessionConfig& cfg, const mklha::PublicParams& pp,
                            ClientState& client, const RealMatrix& plain, std::uint64_t round);

// Phase 2. Sums masked matrices and evaluates authenticators per column.
// Throws ProtocolError on missing, duplicate or foreign updates, and on
// round or configuration-hash mismatch.
AggregateResult aggregate(const SessionConfig& cfg, const mklha::PublicParams& pp,
                          std::span<const ClientUpdate> updates);

// Phase 3. Verifies every column against board keys under the verifier's own
// round number, then decodes and averages on full acceptance. Throws
// MissingKeyError if the snapshot lacks a key for an active client.
Verdict client_verify(const SessionConfig& cfg, const mklha::PublicParams& pp,
                      const std::map<Identity, mklha::VerificationKey>& board_snapshot,
                      const AggregateResult& result, std::uint64_t round,
                      mklha::VerifyMode mode = mklha::VerifyMode::Batch, Rng* rng = nullptr);

// Wire encodings. Sizes reported in transcripts are the lengths of these.
Bytes serialize(const ClientUpdate& update);
ClientUpdate deserialize_client_update(ByteView bytes);
Bytes serialize(const AggregateResult& result);
AggregateResult deserialize_aggregate_result(ByteView bytes);

}  // namespace vfl::protocol
