#include "vfl/mklha.hpp"

#include <fstream>
#include <sstream>

#include "vfl/errors.hpp"
#include "vfl/parallel.hpp"

namespace vfl::mklha {

namespace {

void put_tag(ByteWriter& w, ByteView tag) {
  w.u64(tag.size());
  w.raw(tag);
}

G1 slot_generator(ByteView tag, std::uint64_t index) {
  ByteWriter w;
  w.raw(as_bytes("slot"));
  put_tag(w, tag);
  w.u64(index);
  return G1::hash(w.bytes(), kSlotTag);
}

G1 blind_generator(ByteView tag) {
  ByteWriter w;
  w.raw(as_bytes("blind"));
  put_tag(w, tag);
  return G1::hash(w.bytes(), kBlindTag);
}

void check_dimension(const PublicParams& pp, std::size_t n) {
  if (n != pp.dimension()) {
    throw DimensionError("vector length " + std::to_string(n) + " does not match column length " +
                         std::to_string(pp.dimension()));
  }
}

// Random nonzero 128-bit weight for batch verification.
std::array<std::uint8_t, 16> batch_weight(Rng& rng) {
  std::array<std::uint8_t, 16> w{};
  do {
    rng.fill(w);
  } while (std::all_of(w.begin(), w.end(), [](std::uint8_t b) { return b == 0; }));
  return w;
}

}  // namespace

// ---- parameters -----------------------------------------------------------

PublicParams setup(int security_level, std::size_t d, ByteView session_tag, std::size_t workers) {
  if (security_level != kSecurityLevel) {
    throw ConfigurationError("unsupported security level " + std::to_string(security_level) +
                             " (BLS12-381 provides 128)");
  }
  if (d == 0) throw InvalidArgument("column length must be at least 1");
  PublicParams pp;
  pp.security_level_ = security_level;
  pp.session_tag_.assign(session_tag.begin(), session_tag.end());
  pp.blind_ = blind_generator(session_tag);
  std::vector<G1> slots(d);
  parallel_for(d, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) slots[i] = slot_generator(session_tag, i + 1);
  });
  pp.slots_ = std::make_shared<const G1Bases>(slots);
  return pp;
}

PublicParams PublicParams::prefix(std::size_t d) const {
  if (d == 0) throw InvalidArgument("column length must be at least 1");
  if (d == dimension()) return *this;
  PublicParams out = *this;
  out.slots_ = std::make_shared<const G1Bases>(slots_->prefix(d));
  return out;
}

Digest PublicParams::digest() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(security_level_));
  put_tag(w, session_tag_);
  w.raw(blind_.compress());
  w.u64(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) {
    G1::Compressed c{};
    blst_p1_affine_compress(c.data(), &slots()[i]);
    w.raw(c);
  }
  return sha256(w.bytes());
}

// ---- keys -----------------------------------------------------------------

SecretKey::SecretKey(const FieldScalar& a) : a_(a) {
  if (a.is_zero()) throw KeyGenerationError("secret key must be nonzero");
}

KeyPair keygen(const PublicParams&, Identity id, Rng& rng) {
  // nonzero_field resamples on zero, so a = 0 never reaches SecretKey.
  SecretKey sk(rng.nonzero_field());
  VerificationKey vk{G2::generator() * sk.scalar()};
  return {id, sk, vk};
}

G1 Label::hash() const {
  ByteWriter w;
  w.raw(as_bytes("label"));
  put_tag(w, session_tag);
  w.u64(round);
  w.u64(column);
  return G1::hash(w.bytes(), kLabelTag);
}

// ---- authentication -------------------------------------------------------

Authenticator auth_with_randomness(const PublicParams& pp, const SecretKey& sk, const Label& label,
                                   std::span<const FieldScalar> x, const FieldScalar& r, Parallelism par) {
  check_dimension(pp, x.size());
  Authenticator out;
  out.commit = pp.blind() * r + msm(pp.slots(), 0, x, par.partitions, par.workers);
  out.lambda = (label.hash() + out.commit) * sk.scalar();
  out.s = G2::generator() * r;
  return out;
}

Authenticator auth(const PublicParams& pp, const SecretKey& sk, const Label& label,
                   std::span<const FieldScalar> x, Rng& rng, Parallelism par) {
  check_dimension(pp, x.size());
  return auth_with_randomness(pp, sk, label, x, rng.nonzero_field(), par);
}

bool verify_single(const PublicParams&, const VerificationKey& vk, const Label& label,
                   const Authenticator& sigma) {
  if (vk.point.is_identity()) return false;
  const G1 lhs[] = {sigma.lambda, -(label.hash() + sigma.commit)};
  const G2 rhs[] = {G2::generator(), vk.point};
  return pairing_product_is_one(lhs, rhs);
}

AggregatedAuthenticator eval(const PublicParams&, const std::map<Identity, Authenticator>& sigmas) {
  if (sigmas.empty()) throw InvalidArgument("cannot aggregate an empty authenticator set");
  AggregatedAuthenticator out;
  for (const auto& [id, sigma] : sigmas) {
    out.per_identity.emplace(id, IdentityComponent{sigma.lambda, sigma.commit});
    out.s_agg += sigma.s;
  }
  return out;
}

// ---- verification ---------------------------------------------------------

VerifyResult verify(const PublicParams& pp, const std::map<Identity, VerificationKey>& vks,
                    const Label& label, std::span<const FieldScalar> x_sum,
                    const AggregatedAuthenticator& sigma, const VerifyOptions& opts) {
  check_dimension(pp, x_sum.size());
  VerifyResult result;

  const bool same_keys =
      vks.size() == sigma.per_identity.size() &&
      std::equal(vks.begin(), vks.end(), sigma.per_identity.begin(),
                 [](const auto& a, const auto& b) { return a.first == b.first; });
  if (!same_keys || vks.empty()) {
    result.reason = RejectReason::KeySetMismatch;
    return result;
  }

  const G1 h_label = label.hash();
  const G2 g2 = G2::generator();

  // Per-identity binding: e(Lambda_u, g2) == e(H(label) * C_u, vk_u).
  if (opts.mode == VerifyMode::Strict) {
    for (const auto& [id, comp] : sigma.per_identity) {
      const auto& vk = vks.at(id);
      const G1 lhs[] = {comp.lambda, -(h_label + comp.commit)};
      const G2 rhs[] = {g2, vk.point};
      if (vk.point.is_identity() || !pairing_product_is_one(lhs, rhs)) {
        result.failing_identities.push_back(id);
      }
    }
    if (!result.failing_identities.empty()) {
      result.reason = RejectReason::IdentityCheck;
      return result;
    }
  } else {
    Rng local;
    Rng& rng = opts.rng != nullptr ? *opts.rng : local;
    std::vector<G1> ps;
    std::vector<G2> qs;
    ps.reserve(vks.size() + 1);
    qs.reserve(vks.size() + 1);
    G1 weighted_lambda;
    for (const auto& [id, comp] : sigma.per_identity) {
      const auto& vk = vks.at(id);
      if (vk.point.is_identity()) {
        result.reason = RejectReason::IdentityCheck;
        return result;
      }
      const auto w = batch_weight(rng);
      weighted_lambda += comp.lambda.mul_bits(w, 128);
      ps.push_back(-(h_label + comp.commit).mul_bits(w, 128));
      qs.push_back(vk.point);
    }
    ps.push_back(weighted_lambda);
    qs.push_back(g2);
    if (!pairing_product_is_one(ps, qs)) {
      result.reason = RejectReason::IdentityCheck;
      return result;
    }
  }

  // Sum binding: e(prod C_u - sum x_i h_i, g2) == e(f, S_agg).
  G1 commit_sum;
  for (const auto& [id, comp] : sigma.per_identity) commit_sum += comp.commit;
  const G1 claimed = msm(pp.slots(), 0, x_sum, opts.par.partitions, opts.par.workers);
  const G1 lhs[] = {commit_sum - claimed, -pp.blind()};
  const G2 rhs[] = {g2, sigma.s_agg};
  if (!pairing_product_is_one(lhs, rhs)) {
    result.reason = RejectReason::SumCheck;
    return result;
  }

  result.accepted = true;
  return result;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::KeySetMismatch: return "key-set-mismatch";
    case RejectReason::IdentityCheck: return "identity-check";
    case RejectReason::SumCheck: return "sum-check";
  }
  return "unknown";
}

// ---- serialization --------------------------------------------------------

Bytes serialize(const Authenticator& sigma) {
  ByteWriter w;
  w.raw(sigma.lambda.compress());
  w.raw(sigma.commit.compress());
  w.raw(sigma.s.compress());
  return std::move(w).take();
}

Authenticator deserialize_authenticator(ByteView bytes) {
  if (bytes.size() != Authenticator::kSerializedBytes) {
    throw DeserializationError("authenticator must be " + std::to_string(Authenticator::kSerializedBytes) +
                               " bytes, got " + std::to_string(bytes.size()));
  }
  ByteReader r(bytes);
  Authenticator out;
  out.lambda = G1::decompress(r.raw(G1::kCompressedBytes));
  out.commit = G1::decompress(r.raw(G1::kCompressedBytes));
  out.s = G2::decompress(r.raw(G2::kCompressedBytes));
  return out;
}

Bytes serialize(const AggregatedAuthenticator& sigma) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(sigma.per_identity.size()));
  for (const auto& [id, comp] : sigma.per_identity) {
    w.u64(id.value);
    w.raw(comp.lambda.compress());
    w.raw(comp.commit.compress());
  }
  w.raw(sigma.s_agg.compress());
  return std::move(w).take();
}

AggregatedAuthenticator deserialize_aggregated(ByteView bytes) {
  ByteReader r(bytes);
  const std::uint32_t n = r.u32();
  constexpr std::size_t kEntry = 8 + 2 * G1::kCompressedBytes;
  if (r.remaining() != n * kEntry + G2::kCompressedBytes) {
    throw DeserializationError("aggregated authenticator length does not match its entry count");
  }
  AggregatedAuthenticator out;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Identity id{r.u64()};
    IdentityComponent comp;
    comp.lambda = G1::decompress(r.raw(G1::kCompressedBytes));
    comp.commit = G1::decompress(r.raw(G1::kCompressedBytes));
    if (!out.per_identity.emplace(id, comp).second) {
      throw DeserializationError("duplicate identity in aggregated authenticator");
    }
  }
  out.s_agg = G2::decompress(r.raw(G2::kCompressedBytes));
  return out;
}

// ---- key files ------------------------------------------------------------

namespace {

std::string vk_header() { return "vfl-vk v1 " + std::string(kCurveName); }
std::string sk_header() { return "vfl-sk v1 " + std::string(kCurveName); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

}  // namespace

void write_verification_keys(const std::filesystem::path& path, std::span<const VerificationKey> vks) {
  auto out = open_out(path);
  out << vk_header() << '\n';
  for (const auto& vk : vks) out << to_hex(vk.point.compress()) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<VerificationKey> read_verification_keys(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != vk_header()) {
    throw DeserializationError(path.string() + ": missing '" + vk_header() + "' header");
  }
  std::vector<VerificationKey> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Bytes raw = from_hex(line);
    VerificationKey vk{G2::decompress(raw)};
    if (vk.point.is_identity()) throw DeserializationError("verification key is the identity element");
    out.push_back(vk);
  }
  return out;
}

void write_secret_key(const std::filesystem::path& path, Identity id, const SecretKey& sk) {
  auto out = open_out(path);
  out << sk_header() << '\n' << "id " << id.value << '\n' << sk.scalar().to_hex() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                               std::filesystem::perm_options::replace);
}

KeyPair read_secret_key(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string header, id_line, hex;
  if (!std::getline(in, header) || header != sk_header()) {
    throw DeserializationError(path.string() + ": missing '" + sk_header() + "' header");
  }
  if (!std::getline(in, id_line) || id_line.rfind("id ", 0) != 0) {
    throw DeserializationError(path.string() + ": missing id line");
  }
  Identity id;
  try {
    id.value = std::stoull(id_line.substr(3));
  } catch (const std::exception&) {
    throw DeserializationError(path.string() + ": malformed id");
  }
  if (!std::getline(in, hex)) throw DeserializationError(path.string() + ": missing key");
  SecretKey sk(FieldScalar::from_canonical_le(from_hex(hex)));
  VerificationKey vk{G2::generator() * sk.scalar()};
  return {id, sk, vk};
}

}  // namespace vfl::mklha
