#include "vfl/maskagg.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include <sodium.h>

#include "vfl/errors.hpp"

namespace vfl::maskagg {

namespace {

constexpr std::string_view kFileHeader = "vfl-pw v1";
constexpr std::size_t kRecordBytes = 4 + 4 + 32;
constexpr std::size_t kBlockBytes = 64;

std::pair<Identity, Identity> ordered(Identity u, Identity v) { return u < v ? std::pair{u, v} : std::pair{v, u}; }

}  // namespace

void PairwiseSecrets::insert(Identity u, Identity v, const PairSeed& seed) {
  if (u == v) throw ConfigurationError("pairwise secret needs two distinct identities");
  if (!seeds_.emplace(ordered(u, v), seed).second) {
    throw ConfigurationError("duplicate pairwise secret for (" + u.str() + ", " + v.str() + ")");
  }
}

std::optional<PairSeed> PairwiseSecrets::find(Identity u, Identity v) const {
  const auto it = seeds_.find(ordered(u, v));
  if (it == seeds_.end()) return std::nullopt;
  return it->second;
}

PairwiseSecrets PairwiseSecrets::view_for(Identity owner) const {
  PairwiseSecrets out;
  for (const auto& [pair, seed] : seeds_) {
    if (pair.first == owner || pair.second == owner) out.seeds_.emplace(pair, seed);
  }
  return out;
}

std::vector<PairwiseSecret> PairwiseSecrets::records() const {
  std::vector<PairwiseSecret> out;
  out.reserve(seeds_.size());
  for (const auto& [pair, seed] : seeds_) out.push_back({pair.first, pair.second, seed});
  return out;
}

PairwiseSecrets provision(std::span<const Identity> ids, Rng& rng) {
  PairwiseSecrets out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      PairSeed seed{};
      rng.fill(seed);
      out.insert(ids[i], ids[j], seed);
    }
  }
  return out;
}

FieldVector derive_mask_stream(const PairSeed& seed, std::uint64_t round, std::uint64_t column,
                               std::size_t length) {
  if (length == 0) throw InvalidArgument("mask stream length must be at least 1");
  if (column > 0xffffffffULL) throw InvalidArgument("column index exceeds 32 bits");
  std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(round >> (8 * i));
  for (int i = 0; i < 4; ++i) nonce[8 + i] = static_cast<std::uint8_t>(column >> (8 * i));

  FieldVector out;
  out.reserve(length);
  // Generated in chunks so the keystream buffer stays small for long columns.
  constexpr std::size_t kChunkBlocks = 1024;
  std::vector<std::uint8_t> buf(kChunkBlocks * kBlockBytes);
  for (std::size_t done = 0; done < length;) {
    const std::size_t blocks = std::min(kChunkBlocks, length - done);
    std::memset(buf.data(), 0, blocks * kBlockBytes);
    crypto_stream_chacha20_ietf_xor_ic(buf.data(), buf.data(), blocks * kBlockBytes, nonce,
                                       static_cast<std::uint32_t>(done), seed.data());
    for (std::size_t k = 0; k < blocks; ++k) {
      out.push_back(FieldScalar::reduce_le(ByteView(buf.data() + k * kBlockBytes, kBlockBytes)));
    }
    done += blocks;
  }
  return out;
}

FieldVector mask_vector(Identity owner, const PairwiseSecrets& secrets, std::span<const Identity> active,
                        std::uint64_t round, std::uint64_t column, std::size_t length) {
  if (std::find(active.begin(), active.end(), owner) == active.end()) {
    throw ConfigurationError("client " + owner.str() + " is not in the active set");
  }
  FieldVector r(length);
  for (const Identity peer : active) {
    if (peer == owner) continue;
    const auto seed = secrets.find(owner, peer);
    if (!seed) {
      throw ConfigurationError("missing pairwise secret between " + owner.str() + " and " + peer.str());
    }
    const FieldVector stream = derive_mask_stream(*seed, round, column, length);
    if (peer > owner) {
      add_assign(r, stream);
    } else {
      sub_assign(r, stream);
    }
  }
  return r;
}

FieldVector mask(std::span<const FieldScalar> x, Identity owner, const PairwiseSecrets& secrets,
                 std::span<const Identity> active, std::uint64_t round, std::uint64_t column) {
  if (x.empty()) throw InvalidArgument("cannot mask an empty vector");
  FieldVector out = mask_vector(owner, secrets, active, round, column, x.size());
  add_assign(out, x);
  return out;
}

FieldVector unmask_sum(std::span<const std::span<const FieldScalar>> masked, std::size_t active_count) {
  if (masked.size() != active_count) {
    throw ProtocolError("expected " + std::to_string(active_count) + " masked vectors, got " +
                        std::to_string(masked.size()));
  }
  if (masked.empty()) throw ProtocolError("no masked vectors to sum");
  FieldVector sum(masked.front().begin(), masked.front().end());
  for (std::size_t k = 1; k < masked.size(); ++k) add_assign(sum, masked[k]);
  return sum;
}

void write_secrets_file(const std::filesystem::path& path, const PairwiseSecrets& secrets) {
  ByteWriter w;
  w.raw(as_bytes(kFileHeader));
  for (const auto& rec : secrets.records()) {
    if (rec.u.value > 0xffffffffULL || rec.v.value > 0xffffffffULL) {
      throw ConfigurationError("secrets file stores identities as u32");
    }
    w.u32(static_cast<std::uint32_t>(rec.u.value));
    w.u32(static_cast<std::uint32_t>(rec.v.value));
    w.raw(rec.seed);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& bytes = w.bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                               std::filesystem::perm_options::replace);
}

PairwiseSecrets read_secrets_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(bytes);
  const ByteView header = r.raw(std::min(kFileHeader.size(), r.remaining()));
  if (!std::equal(header.begin(), header.end(), as_bytes(kFileHeader).begin(), as_bytes(kFileHeader).end())) {
    throw DeserializationError(path.string() + ": not a vfl-pw v1 file");
  }
  if (r.remaining() % kRecordBytes != 0) throw DeserializationError(path.string() + ": truncated record");
  PairwiseSecrets out;
  std::pair<std::uint32_t, std::uint32_t> prev{0, 0};
  bool first = true;
  while (!r.done()) {
    const std::uint32_t u = r.u32();
    const std::uint32_t v = r.u32();
    PairSeed seed{};
    const ByteView raw = r.raw(seed.size());
    std::copy(raw.begin(), raw.end(), seed.begin());
    const std::pair key{std::min(u, v), std::max(u, v)};
    if (!first && !(prev < key)) throw DeserializationError(path.string() + ": records not sorted");
    prev = key;
    first = false;
    out.insert(Identity{u}, Identity{v}, seed);
  }
  return out;
}

}  // namespace vfl::maskagg
