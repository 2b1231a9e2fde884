#pragma once

// Identity-based multi-key linearly homomorphic authenticator over BLS12-381.
//
//   setup:  h[i] = H_G1("slot" | tag | i), f = H_G1("blind" | tag)
//   keygen: a <- F_p \ {0}, vk = g2^a
//   auth:   C = f^r * prod h[i]^{x_i},  Lambda = (H_G1(label) * C)^a,  S = g2^r
//   eval:   keep (Lambda_u, C_u) per identity, S_agg = prod S_u
//   verify: e(Lambda_u, g2) == e(H_G1(label) * C_u, vk_u)           for all u
//           e(prod C_u * (prod h[i]^{x_i})^{-1}, g2) == e(f, S_agg)
//
// The first check binds each commitment to its signer and to the label
// (round, column); the second binds the claimed sum to the commitments.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfl/bytes.hpp"
#include "vfl/field.hpp"
#include "vfl/group.hpp"
#include "vfl/identity.hpp"
#include "vfl/rng.hpp"

namespace vfl::mklha {

inline constexpr std::string_view kCurveName = "BLS12-381";
inline constexpr int kSecurityLevel = 128;

inline constexpr std::string_view kSlotTag = "VFL/slot/";
inline constexpr std::string_view kBlindTag = "VFL/blind/";
inline constexpr std::string_view kLabelTag = "VFL/label/";

class PublicParams {
 public:
  int security_level() const { return security_level_; }
  std::size_t dimension() const { return slots_->size(); }
  const Bytes& session_tag() const { return session_tag_; }
  const G1& blind() const { return blind_; }
  const G1Bases& slots() const { return *slots_; }
  G1 slot(std::size_t i) const { return G1(slots()[i]); }

  // Parameters for a shorter column length. Slot generators depend only on
  // (tag, index), so this equals setup(lambda, d, tag) without rehashing.
  PublicParams prefix(std::size_t d) const;

  // SHA-256 over the serialized generators; lets parties compare params.
  Digest digest() const;

 private:
  friend PublicParams setup(int, std::size_t, ByteView, std::size_t);

  int security_level_ = kSecurityLevel;
  Bytes session_tag_;
  G1 blind_;
  std::shared_ptr<const G1Bases> slots_;
};

// Deterministic in (security_level, d, session_tag). Throws
// ConfigurationError for an unsupported security level and
// InvalidArgument for d == 0.
PublicParams setup(int security_level, std::size_t d, ByteView session_tag,
                   std::size_t workers = 1);

class SecretKey {
 public:
  // Throws KeyGenerationError if a is zero.
  explicit SecretKey(const FieldScalar& a);
  const FieldScalar& scalar() const { return a_; }

 private:
  FieldScalar a_;
};

struct VerificationKey {
  G2 point;
  friend bool operator==(const VerificationKey&, const VerificationKey&) = default;
};

struct KeyPair {
  Identity id;
  SecretKey sk;
  VerificationKey vk;
};

KeyPair keygen(const PublicParams& pp, Identity id, Rng& rng);

struct Label {
  Bytes session_tag;
  std::uint64_t round = 0;
  std::uint64_t column = 0;

  G1 hash() const;
};

struct Authenticator {
  static constexpr std::size_t kSerializedBytes = 2 * G1::kCompressedBytes + G2::kCompressedBytes;

  G1 lambda;
  G1 commit;
  G2 s;

  friend bool operator==(const Authenticator&, const Authenticator&) = default;
};

struct IdentityComponent {
  G1 lambda;
  G1 commit;
  friend bool operator==(const IdentityComponent&, const IdentityComponent&) = default;
};

struct AggregatedAuthenticator {
  std::map<Identity, IdentityComponent> per_identity;
  G2 s_agg;

  friend bool operator==(const AggregatedAuthenticator&, const AggregatedAuthenticator&) = default;
};

// How a single column's multi-scalar multiplication is split.
struct Parallelism {
  std::size_t partitions = 1;
  std::size_t workers = 1;
};

// Throws DimensionError unless x.size() == pp.dimension().
Authenticator auth(const PublicParams& pp, const SecretKey& sk, const Label& label,
                   std::span<const FieldScalar> x, Rng& rng, Parallelism par = {});

// auth with caller-chosen commitment randomness r (r = 0 is allowed here and
// only here; it yields C = identity for the zero vector).
Authenticator auth_with_randomness(const PublicParams& pp, const SecretKey& sk, const Label& label,
                                   std::span<const FieldScalar> x, const FieldScalar& r,
                                   Parallelism par = {});

bool verify_single(const PublicParams& pp, const VerificationKey& vk, const Label& label,
                   const Authenticator& sigma);

// Throws InvalidArgument for an empty set.
AggregatedAuthenticator eval(const PublicParams& pp, const std::map<Identity, Authenticator>& sigmas);

enum class VerifyMode {
  Batch,   // identity checks folded into one pairing product with random 128-bit weights
  Strict,  // one pairing equation per identity
};

enum class RejectReason {
  None,
  KeySetMismatch,
  IdentityCheck,
  SumCheck,
};

struct VerifyResult {
  bool accepted = false;
  RejectReason reason = RejectReason::None;
  // Populated in Strict mode when an identity check fails.
  std::vector<Identity> failing_identities;

  explicit operator bool() const { return accepted; }
};

struct VerifyOptions {
  VerifyMode mode = VerifyMode::Batch;
  Parallelism par;
  // Source of the batch weights; an OS-seeded generator when null.
  Rng* rng = nullptr;
};

// Throws DimensionError unless x_sum.size() == pp.dimension().
VerifyResult verify(const PublicParams& pp, const std::map<Identity, VerificationKey>& vks,
                    const Label& label, std::span<const FieldScalar> x_sum,
                    const AggregatedAuthenticator& sigma, const VerifyOptions& opts = {});

Bytes serialize(const Authenticator& sigma);
// Throws DeserializationError on wrong length or invalid points.
Authenticator deserialize_authenticator(ByteView bytes);

Bytes serialize(const AggregatedAuthenticator& sigma);
AggregatedAuthenticator deserialize_aggregated(ByteView bytes);

// Key files. Verification keys: header "vfl-vk v1 BLS12-381" followed by one
// hex-encoded compressed G2 point per line. Secret keys: header
// "vfl-sk v1 BLS12-381", then "id <n>" and the hex scalar.
void write_verification_keys(const std::filesystem::path& path, std::span<const VerificationKey> vks);
std::vector<VerificationKey> read_verification_keys(const std::filesystem::path& path);
void write_secret_key(const std::filesystem::path& path, Identity id, const SecretKey& sk);
KeyPair read_secret_key(const std::filesystem::path& path);

std::string_view to_string(RejectReason reason);

}  // namespace vfl::mklha
