#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vfl/field.hpp"
#include "vfl/identity.hpp"
#include "vfl/rng.hpp"

namespace vfl::maskagg {

using PairSeed = std::array<std::uint8_t, 32>;

// Shared seed z_{u,v} = z_{v,u}. Stored with u < v.
struct PairwiseSecret {
  Identity u;
  Identity v;
  PairSeed seed{};

  friend bool operator==(const PairwiseSecret&, const PairwiseSecret&) = default;
};

// Collection of pairwise secrets keyed by the unordered pair.
class PairwiseSecrets {
 public:
  PairwiseSecrets() = default;

  // Throws ConfigurationError on u == v or a second seed for the same pair.
  void insert(Identity u, Identity v, const PairSeed& seed);
  std::optional<PairSeed> find(Identity u, Identity v) const;

  // Only the pairs that involve `owner`.
  PairwiseSecrets view_for(Identity owner) const;

  // Sorted by (min(u, v), max(u, v)).
  std::vector<PairwiseSecret> records() const;
  std::size_t size() const { return seeds_.size(); }

 private:
  std::map<std::pair<Identity, Identity>, PairSeed> seeds_;
};

// Fresh uniform seeds for every unordered pair of `ids`.
PairwiseSecrets provision(std::span<const Identity> ids, Rng& rng);

// PRF expansion of (seed, round, column) into `length` scalars: ChaCha20 keyed
// by the seed with nonce (round, column); scalar k is block k (512 bits)
// reduced mod p.
FieldVector derive_mask_stream(const PairSeed& seed, std::uint64_t round, std::uint64_t column,
                               std::size_t length);

// r_u = sum_{v in S, v > u} stream(z_uv) - sum_{v in S, v < u} stream(z_uv).
// Throws ConfigurationError if u is not active or a peer's seed is missing.
FieldVector mask_vector(Identity owner, const PairwiseSecrets& secrets, std::span<const Identity> active,
                        std::uint64_t round, std::uint64_t column, std::size_t length);

// x + r_u (mod p).
FieldVector mask(std::span<const FieldScalar> x, Identity owner, const PairwiseSecrets& secrets,
                 std::span<const Identity> active, std::uint64_t round, std::uint64_t column);

// Elementwise sum mod p. Throws ProtocolError unless there is exactly one
// vector per active client, DimensionError on ragged input.
FieldVector unmask_sum(std::span<const std::span<const FieldScalar>> masked, std::size_t active_count);

// Binary secrets file: "vfl-pw v1" then records (u:u32, v:u32, seed:32 bytes)
// little-endian, sorted by (min(u,v), max(u,v)).
void write_secrets_file(const std::filesystem::path& path, const PairwiseSecrets& secrets);
PairwiseSecrets read_secrets_file(const std::filesystem::path& path);

}  // namespace vfl::maskagg
