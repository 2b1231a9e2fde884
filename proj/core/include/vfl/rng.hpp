#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "vfl/bytes.hpp"
#include "vfl/field.hpp"

namespace vfl {

using Seed = std::array<std::uint8_t, 32>;

// ChaCha20 keystream generator. Seeded instances are fully deterministic,
// which is what makes `--seed` runs reproducible; the default constructor
// draws its key from the operating system.
class Rng {
 public:
  Rng();
  explicit Rng(const Seed& seed);

  // Independent child stream keyed by H(parent seed || label).
  Rng derive(std::string_view label) const;
  Rng derive(std::string_view label, std::uint64_t a, std::uint64_t b = 0) const;

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  // Uniform in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  // 512 random bits reduced mod p.
  FieldScalar field();
  FieldScalar nonzero_field();

  const Seed& seed() const { return key_; }

 private:
  void refill();

  Seed key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 256> buf_{};
  std::size_t pos_ = sizeof(buf_);
};

Seed seed_from_hex(std::string_view hex);

}  // namespace vfl
