#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "vfl/bytes.hpp"
#include "vfl/identity.hpp"
#include "vfl/mklha.hpp"

namespace vfl::board {

struct BoardEntry {
  Identity id;
  mklha::VerificationKey vk;
  std::uint64_t registered_at = 0;
};

// Append-only registry of identity -> verification key bindings.
class BulletinBoard {
 public:
  virtual ~BulletinBoard() = default;

  // Throws RegistrationConflict if the identity is already present.
  virtual void register_entry(const BoardEntry& entry) = 0;
  virtual std::optional<mklha::VerificationKey> get(Identity id) const = 0;
  // Entries in registration order.
  virtual std::vector<BoardEntry> entries() const = 0;

  // Keys for exactly `ids`, ordered by identity. Throws MissingKeyError for
  // any unregistered identity.
  std::map<Identity, mklha::VerificationKey> snapshot(std::span<const Identity> ids) const;
  std::size_t size() const { return entries().size(); }
};

class MemoryBoard final : public BulletinBoard {
 public:
  void register_entry(const BoardEntry& entry) override;
  std::optional<mklha::VerificationKey> get(Identity id) const override;
  std::vector<BoardEntry> entries() const override;

 private:
  mutable std::shared_mutex mu_;
  std::vector<BoardEntry> entries_;
  std::map<Identity, std::size_t> index_;
};

// Line-oriented file: "id,hex(vk),hex(prev_hash),hex(entry_hash)" with
// entry_hash = SHA-256(id:u64le || vk || prev_hash) and a zero genesis hash.
// Opening validates the whole chain; register appends and flushes one line.
// registered_at is not part of the line format and reads back as 0.
class FileBoard final : public BulletinBoard {
 public:
  // Creates the file if absent. Throws IoError / DeserializationError on a
  // broken chain.
  explicit FileBoard(std::filesystem::path path);

  void register_entry(const BoardEntry& entry) override;
  std::optional<mklha::VerificationKey> get(Identity id) const override;
  std::vector<BoardEntry> entries() const override;

  const std::filesystem::path& path() const { return path_; }
  Digest head() const;

 private:
  std::filesystem::path path_;
  MemoryBoard cache_;
  mutable std::shared_mutex mu_;
  Digest head_{};
};

Digest entry_hash(Identity id, const mklha::VerificationKey& vk, const Digest& prev);

struct ChainCheck {
  bool valid = false;
  std::size_t entries = 0;
  std::size_t first_bad_line = 0;  // 1-based; 0 when valid
};

// Walks the hash chain of a board file without trusting any cached state.
ChainCheck verify_chain(const std::filesystem::path& path);

}  // namespace vfl::board
