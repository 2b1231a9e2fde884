#include "vfl/rng.hpp"

#include <cstring>

#include <sodium.h>

#include "vfl/errors.hpp"

namespace vfl {

namespace {
void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw KeyGenerationError("libsodium initialisation failed");
}
}  // namespace

Rng::Rng() {
  ensure_sodium();
  randombytes_buf(key_.data(), key_.size());
}

Rng::Rng(const Seed& seed) : key_(seed) { ensure_sodium(); }

Rng Rng::derive(std::string_view label) const { return derive(label, 0, 0); }

Rng Rng::derive(std::string_view label, std::uint64_t a, std::uint64_t b) const {
  ByteWriter w;
  w.raw(key_);
  w.u64(label.size());
  w.raw(as_bytes(label));
  w.u64(a);
  w.u64(b);
  const Digest d = sha256(w.bytes());
  Seed child{};
  std::memcpy(child.data(), d.data(), child.size());
  return Rng(child);
}

void Rng::refill() {
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  for (std::size_t i = 0; i < sizeof(nonce); ++i) nonce[i] = static_cast<std::uint8_t>(block_ >> (8 * i));
  crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
  ++block_;
  pos_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

std::uint64_t Rng::next_u64() {
  std::uint8_t b[8];
  fill(b);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw InvalidArgument("empty range");
  const std::uint64_t span = hi - lo;
  if (span == ~std::uint64_t{0}) return next_u64();
  const std::uint64_t n = span + 1;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + v % n;
}

FieldScalar Rng::field() {
  std::array<std::uint8_t, 64> wide{};
  fill(wide);
  return FieldScalar::reduce_le(wide);
}

FieldScalar Rng::nonzero_field() {
  for (;;) {
    auto v = field();
    if (!v.is_zero()) return v;
  }
}

Seed seed_from_hex(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  // Short or long seeds are hashed to 32 bytes so any hex string works.
  const Digest d = sha256(raw);
  Seed out{};
  std::memcpy(out.data(), d.data(), out.size());
  return out;
}

}  // namespace vfl
