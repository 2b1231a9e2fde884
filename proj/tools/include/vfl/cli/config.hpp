#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "vfl/protocol.hpp"
#include "vfl/rng.hpp"

namespace vfl::cli {

// Plain-text key-value session file ("key = value" per line, '#' comments):
// d, m, dp, clients, subcolumns, seed, curve, plus max_abs.
struct SessionFile {
  std::size_t d = 16;
  std::size_t m = 4;
  int dp = Precision::kDefault;
  std::size_t clients = 4;
  std::size_t subcolumns = 1;
  std::string seed = "00";
  std::string curve = "BLS12-381";
  double max_abs = 1.0;

  // Session tag derived from the seed; identical seeds name the same session.
  Bytes session_tag() const;
  Seed seed_bytes() const { return seed_from_hex(seed); }
  protocol::SessionConfig to_session(std::size_t workers) const;
};

void write_session_file(const std::filesystem::path& path, const SessionFile& cfg);
// Throws ConfigurationError on unknown keys or malformed values.
SessionFile read_session_file(const std::filesystem::path& path);

// Layout of a setup directory.
struct SetupPaths {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.txt"; }
  std::filesystem::path params() const { return root / "params.txt"; }
  std::filesystem::path secrets() const { return root / "pairwise.bin"; }
  std::filesystem::path board() const { return root / "board.csv"; }
  std::filesystem::path keys() const { return root / "keys"; }
  std::filesystem::path secret_key(Identity id) const { return keys() / ("client-" + id.str() + ".sk"); }
  std::filesystem::path verification_key(Identity id) const { return keys() / ("client-" + id.str() + ".vk"); }
  std::filesystem::path transcript(std::uint64_t round) const {
    return root / ("transcript-round-" + std::to_string(round) + ".jsonl");
  }
};

// --threads, else VFL_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t flag);

}  // namespace vfl::cli
