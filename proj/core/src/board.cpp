#include "vfl/board.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "vfl/errors.hpp"

namespace vfl::board {

std::map<Identity, mklha::VerificationKey> BulletinBoard::snapshot(std::span<const Identity> ids) const {
  std::map<Identity, mklha::VerificationKey> out;
  for (const Identity id : ids) {
    auto vk = get(id);
    if (!vk) throw MissingKeyError("no verification key registered for client " + id.str());
    out.emplace(id, *vk);
  }
  return out;
}

// ---- in-memory ------------------------------------------------------------

void MemoryBoard::register_entry(const BoardEntry& entry) {
  std::unique_lock lock(mu_);
  if (index_.contains(entry.id)) {
    throw RegistrationConflict("client " + entry.id.str() + " is already registered");
  }
  index_.emplace(entry.id, entries_.size());
  entries_.push_back(entry);
}

std::optional<mklha::VerificationKey> MemoryBoard::get(Identity id) const {
  std::shared_lock lock(mu_);
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].vk;
}

std::vector<BoardEntry> MemoryBoard::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

// ---- file-backed ----------------------------------------------------------

Digest entry_hash(Identity id, const mklha::VerificationKey& vk, const Digest& prev) {
  ByteWriter w;
  w.u64(id.value);
  w.raw(vk.point.compress());
  w.raw(prev);
  return sha256(w.bytes());
}

namespace {

struct ParsedLine {
  Identity id;
  mklha::VerificationKey vk;
  Digest prev{};
  Digest hash{};
};

Digest to_digest(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != 32) throw DeserializationError("hash field must be 32 bytes");
  Digest d{};
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

ParsedLine parse_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (fields.size() != 4) throw DeserializationError("board line must have 4 fields");
  ParsedLine out;
  std::size_t used = 0;
  out.id.value = std::stoull(fields[0], &used);
  if (used != fields[0].size()) throw DeserializationError("malformed identity");
  out.vk.point = G2::decompress(from_hex(fields[1]));
  out.prev = to_digest(fields[2]);
  out.hash = to_digest(fields[3]);
  return out;
}

std::string format_line(Identity id, const mklha::VerificationKey& vk, const Digest& prev, const Digest& hash) {
  return id.str() + "," + to_hex(vk.point.compress()) + "," + to_hex(prev) + "," + to_hex(hash);
}

}  // namespace

ChainCheck verify_chain(const std::filesystem::path& path) {
  ChainCheck out;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Digest prev{};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const ParsedLine p = parse_line(line);
      if (p.prev != prev || entry_hash(p.id, p.vk, p.prev) != p.hash) {
        out.first_bad_line = lineno;
        return out;
      }
      prev = p.hash;
      ++out.entries;
    } catch (const std::exception&) {
      out.first_bad_line = lineno;
      return out;
    }
  }
  out.valid = true;
  return out;
}

FileBoard::FileBoard(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) {
    std::ofstream create(path_);
    if (!create) throw IoError("cannot create " + path_.string());
    return;
  }
  std::ifstream in(path_);
  if (!in) throw IoError("cannot read " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ParsedLine p;
    try {
      p = parse_line(line);
    } catch (const std::exception& e) {
      throw DeserializationError(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (p.prev != head_ || entry_hash(p.id, p.vk, p.prev) != p.hash) {
      throw DeserializationError(path_.string() + ":" + std::to_string(lineno) + ": hash chain broken");
    }
    cache_.register_entry({p.id, p.vk, 0});
    head_ = p.hash;
  }
}

void FileBoard::register_entry(const BoardEntry& entry) {
  std::unique_lock lock(mu_);
  if (cache_.get(entry.id)) {
    throw RegistrationConflict("client " + entry.id.str() + " is already registered");
  }
  const Digest hash = entry_hash(entry.id, entry.vk, head_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to " + path_.string());
  out << format_line(entry.id, entry.vk, head_, hash) << '\n';
  out.flush();
  if (!out) throw IoError("append failed: " + path_.string());
  cache_.register_entry(entry);
  head_ = hash;
}

std::optional<mklha::VerificationKey> FileBoard::get(Identity id) const {
  std::shared_lock lock(mu_);
  return cache_.get(id);
}

std::vector<BoardEntry> FileBoard::entries() const {
  std::shared_lock lock(mu_);
  return cache_.entries();
}

Digest FileBoard::head() const {
  std::shared_lock lock(mu_);
  return head_;
}

}  // namespace vfl::board
