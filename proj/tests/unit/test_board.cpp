#include <gtest/gtest.h>

#include <sodium.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "vfl/board.hpp"
#include "vfl/errors.hpp"

using namespace vfl;
using namespace vfl::board;

namespace {

std::vector<BoardEntry> make_entries(std::size_t n, std::uint64_t seed_byte = 1) {
  Rng rng(seed_from_hex(std::to_string(10 + seed_byte)));
  const auto pp = mklha::setup(128, 1, from_hex("bb"));
  std::vector<BoardEntry> out;
  for (std::size_t k = 1; k <= n; ++k) out.push_back({Identity{k}, mklha::keygen(pp, Identity{k}, rng).vk, 0});
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p;
}

// Independent walk: recompute every link with libsodium's SHA-256.
bool chain_oracle(const std::filesystem::path& path, std::size_t& count) {
  std::ifstream in(path);
  std::string line;
  std::string prev(64, '0');
  count = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string part; std::getline(ss, part, ',');) f.push_back(part);
    if (f.size() != 4 || f[2] != prev) return false;
    const std::uint64_t id = std::stoull(f[0]);
    Bytes msg;
    for (int i = 0; i < 8; ++i) msg.push_back(static_cast<std::uint8_t>(id >> (8 * i)));
    const Bytes vk = from_hex(f[1]), p = from_hex(f[2]);
    msg.insert(msg.end(), vk.begin(), vk.end());
    msg.insert(msg.end(), p.begin(), p.end());
    std::uint8_t h[crypto_hash_sha256_BYTES];
    crypto_hash_sha256(h, msg.data(), msg.size());
    if (to_hex(ByteView(h, sizeof h)) != f[3]) return false;
    prev = f[3];
    ++count;
  }
  return true;
}

}  // namespace

TEST(MemoryBoard, ReadYourWriteAndConflicts) {
  MemoryBoard b;
  const auto e = make_entries(3);
  for (const auto& x : e) b.register_entry(x);
  EXPECT_EQ(b.get(Identity{2}), e[1].vk);
  EXPECT_FALSE(b.get(Identity{9}).has_value());
  EXPECT_THROW(b.register_entry({Identity{1}, e[2].vk, 0}), RegistrationConflict);
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.get(Identity{1}), e[0].vk);
}

TEST(MemoryBoard, Snapshot) {
  MemoryBoard b;
  const auto e = make_entries(4);
  for (auto it = e.rbegin(); it != e.rend(); ++it) b.register_entry(*it);
  const std::vector<Identity> s{Identity{3}, Identity{1}};
  const auto snap = b.snapshot(s);
  ASSERT_EQ(snap.size(), 2u);
  EXPECT_EQ(snap.begin()->first, Identity{1});
  EXPECT_TRUE(b.snapshot({}).empty());
  const std::vector<Identity> missing{Identity{7}};
  EXPECT_THROW(b.snapshot(missing), MissingKeyError);
}

TEST(MemoryBoard, AppendOnlyUnderConcurrency) {
  MemoryBoard b;
  const auto e = make_entries(16);
  std::vector<BoardEntry> seen_prefix;
  std::jthread writer([&] {
    for (const auto& x : e) b.register_entry(x);
  });
  for (int k = 0; k < 200; ++k) {
    const auto now = b.entries();
    ASSERT_LE(seen_prefix.size(), now.size());
    for (std::size_t i = 0; i < seen_prefix.size(); ++i) ASSERT_EQ(now[i].id, seen_prefix[i].id);
    seen_prefix = now;
  }
}

TEST(FileBoard, ChainValidatesAgainstOracle) {
  ASSERT_GE(sodium_init(), 0);
  const auto path = temp_file("vfl-test-board.csv");
  const auto e = make_entries(5);
  {
    FileBoard b(path);
    for (const auto& x : e) b.register_entry(x);
    EXPECT_THROW(b.register_entry(e[0]), RegistrationConflict);
  }
  std::size_t n = 0;
  EXPECT_TRUE(chain_oracle(path, n));
  EXPECT_EQ(n, 5u);
  const auto check = verify_chain(path);
  EXPECT_TRUE(check.valid);
  EXPECT_EQ(check.entries, 5u);

  FileBoard reopened(path);
  EXPECT_EQ(reopened.size(), 5u);
  EXPECT_EQ(reopened.get(Identity{4}), e[3].vk);
  reopened.register_entry(make_entries(6, 2).back());
  EXPECT_TRUE(chain_oracle(path, n));
  EXPECT_EQ(n, 6u);
  std::filesystem::remove(path);
}

TEST(FileBoard, TamperIsDetected) {
  const auto path = temp_file("vfl-test-board-tamper.csv");
  const auto e = make_entries(4);
  {
    FileBoard b(path);
    for (const auto& x : e) b.register_entry(x);
  }
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  // Swap the key on line 3 for line 4's key.
  const auto key_of = [](const std::string& l) { return l.substr(l.find(',') + 1, 192); };
  std::string bad = lines[2];
  bad.replace(bad.find(',') + 1, 192, key_of(lines[3]));
  lines[2] = bad;
  {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  const auto check = verify_chain(path);
  EXPECT_FALSE(check.valid);
  EXPECT_EQ(check.first_bad_line, 3u);
  std::size_t n = 0;
  EXPECT_FALSE(chain_oracle(path, n));
  EXPECT_THROW(FileBoard{path}, DeserializationError);
  std::filesystem::remove(path);
}
