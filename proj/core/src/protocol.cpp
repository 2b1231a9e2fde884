#include "vfl/protocol.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "vfl/errors.hpp"
#include "vfl/parallel.hpp"

namespace vfl::protocol {

namespace {

struct Split {
  std::size_t outer = 1;
  std::size_t inner = 1;
};

// Columns are spread over the worker pool first; leftover workers go to the
// sub-column partitions of each column.
Split split_workers(std::size_t workers, std::size_t columns) {
  Split s;
  s.outer = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(columns, 1));
  s.inner = std::max<std::size_t>(1, workers / s.outer);
  return s;
}

void check_shape(const FieldMatrix& m, const SessionConfig& cfg, const char* what) {
  if (m.rows() != cfg.d || m.cols() != cfg.m) {
    throw DimensionError(std::string(what) + " must be " + std::to_string(cfg.d) + "x" + std::to_string(cfg.m));
  }
}

void put_matrix(ByteWriter& w, const FieldMatrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  for (const auto& v : m.data()) w.raw(v.to_le_bytes());
}

FieldMatrix get_matrix(ByteReader& r) {
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  if (rows != 0 && cols > r.remaining() / FieldScalar::kBytes / rows) {
    throw DeserializationError("matrix larger than message");
  }
  std::vector<FieldScalar> data;
  data.reserve(rows * cols);
  for (std::uint64_t k = 0; k < rows * cols; ++k) data.push_back(FieldScalar::from_canonical_le(r.raw(32)));
  return FieldMatrix(rows, cols, std::move(data));
}

void expect_magic(ByteReader& r, std::string_view magic) {
  const ByteView got = r.raw(magic.size());
  if (!std::equal(got.begin(), got.end(), as_bytes(magic).begin())) {
    throw DeserializationError("unexpected message type");
  }
}

}  // namespace

// ---- configuration --------------------------------------------------------

void SessionConfig::validate() const {
  if (d == 0 || m == 0) throw ConfigurationError("d and m must be positive");
  if (subcolumns == 0) throw ConfigurationError("subcolumns must be positive");
  if (active.empty()) throw ConfigurationError("active set is empty");
  std::set<Identity> seen(active.begin(), active.end());
  if (seen.size() != active.size()) throw ConfigurationError("active set contains duplicates");
  if (active.size() > bounds.max_clients) {
    throw ConfigurationError("active set larger than the encoding bound's max_clients");
  }
  (void)codec();
}

Digest SessionConfig::hash() const {
  ByteWriter w;
  w.raw(as_bytes("vfl-session v1"));
  w.u64(d);
  w.u64(m);
  w.u32(static_cast<std::uint32_t>(precision.decimal_places()));
  w.u64(std::bit_cast<std::uint64_t>(bounds.max_abs_value));
  w.u32(bounds.max_clients);
  w.u64(active.size());
  for (const Identity id : active) w.u64(id.value);
  w.u64(session_tag.size());
  w.raw(session_tag);
  w.u64(subcolumns);
  return sha256(w.bytes());
}

std::vector<std::size_t> Verdict::failing_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < column_ok.size(); ++j) {
    if (!column_ok[j]) out.push_back(j);
  }
  return out;
}

// ---- phase 1 --------------------------------------------------------------

ClientUpdate client_prepare(const SessionConfig& cfg, const mklha::PublicParams& pp, ClientState& client,
                            const RealMatrix& plain, std::uint64_t round) {
  cfg.validate();
  if (plain.rows() != cfg.d || plain.cols() != cfg.m) {
    throw DimensionError("plain update must be " + std::to_string(cfg.d) + "x" + std::to_string(cfg.m));
  }
  if (pp.dimension() != cfg.d) throw DimensionError("public parameters do not match column length");
  if (std::find(cfg.active.begin(), cfg.active.end(), client.id) == cfg.active.end()) {
    throw ConfigurationError("client " + client.id.str() + " is not in the active set");
  }

  // Encode everything first so a bounds violation aborts before any output.
  const Codec codec = cfg.codec();
  FieldMatrix encoded(cfg.d, cfg.m);
  for (std::size_t k = 0; k < plain.data().size(); ++k) encoded.data()[k] = codec.encode(plain.data()[k]);

  std::vector<FieldScalar> randomness(cfg.m);
  for (auto& r : randomness) r = client.rng.nonzero_field();

  ClientUpdate update;
  update.owner = client.id;
  update.round = round;
  update.config_hash = cfg.hash();
  update.masked = {FieldMatrix(cfg.d, cfg.m), round, client.id};
  update.authenticators.resize(cfg.m);

  const Split split = split_workers(cfg.workers, cfg.m);
  const mklha::Parallelism par{cfg.subcolumns, split.inner};
  parallel_for(cfg.m, split.outer, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      const auto plain_col = encoded.column(j);
      const FieldVector masked = maskagg::mask(plain_col, client.id, client.secrets, cfg.active, round, j);
      std::copy(masked.begin(), masked.end(), update.masked.entries.column(j).begin());
      update.authenticators[j] =
          mklha::auth_with_randomness(pp, client.sk, cfg.label(round, j), plain_col, randomness[j], par);
    }
  });
  return update;
}

// ---- phase 2 --------------------------------------------------------------

AggregateResult aggregate(const SessionConfig& cfg, const mklha::PublicParams& pp,
                          std::span<const ClientUpdate> updates) {
  cfg.validate();
  if (updates.size() != cfg.active.size()) {
    throw ProtocolError("expected updates from " + std::to_string(cfg.active.size()) + " clients, got " +
                        std::to_string(updates.size()));
  }
  const std::set<Identity> active(cfg.active.begin(), cfg.active.end());
  std::set<Identity> seen;
  const Digest cfg_hash = cfg.hash();
  const std::uint64_t round = updates.front().round;
  for (const auto& u : updates) {
    if (!active.contains(u.owner)) throw ProtocolError("update from non-member " + u.owner.str());
    if (!seen.insert(u.owner).second) throw ProtocolError("duplicate update from " + u.owner.str());
    if (u.config_hash != cfg_hash) throw ProtocolError("configuration hash mismatch from " + u.owner.str());
    if (u.round != round || u.masked.round != round) throw ProtocolError("round mismatch from " + u.owner.str());
    if (u.masked.owner != u.owner) throw ProtocolError("masked matrix owner mismatch");
    check_shape(u.masked.entries, cfg, "masked matrix");
    if (u.authenticators.size() != cfg.m) throw ProtocolError("wrong authenticator count from " + u.owner.str());
  }

  AggregateResult result;
  result.round = round;
  result.active = cfg.active;
  result.x_agg = FieldMatrix(cfg.d, cfg.m);
  result.sigma_agg.resize(cfg.m);

  const Split split = split_workers(cfg.workers, cfg.m);
  parallel_for(cfg.m, split.outer, [&](std::size_t b, std::size_t e) {
    std::vector<std::span<const FieldScalar>> columns(updates.size());
    for (std::size_t j = b; j < e; ++j) {
      std::map<Identity, mklha::Authenticator> sigmas;
      for (std::size_t k = 0; k < updates.size(); ++k) {
        columns[k] = updates[k].masked.entries.column(j);
        sigmas.emplace(updates[k].owner, updates[k].authenticators[j]);
      }
      const FieldVector sum = maskagg::unmask_sum(columns, cfg.active.size());
      std::copy(sum.begin(), sum.end(), result.x_agg.column(j).begin());
      result.sigma_agg[j] = mklha::eval(pp, sigmas);
    }
  });
  return result;
}

// ---- phase 3 --------------------------------------------------------------

Verdict client_verify(const SessionConfig& cfg, const mklha::PublicParams& pp,
                      const std::map<Identity, mklha::VerificationKey>& board_snapshot,
                      const AggregateResult& result, std::uint64_t round, mklha::VerifyMode mode, Rng* rng) {
  cfg.validate();
  // Keys come from the board snapshot for the pre-agreed S only; nothing the
  // aggregator sends can add or replace a key.
  std::map<Identity, mklha::VerificationKey> vks;
  for (const Identity id : cfg.active) {
    const auto it = board_snapshot.find(id);
    if (it == board_snapshot.end()) throw MissingKeyError("board snapshot lacks a key for client " + id.str());
    vks.emplace(id, it->second);
  }

  Verdict verdict;
  verdict.column_ok.assign(cfg.m, false);
  verdict.reasons.assign(cfg.m, mklha::RejectReason::None);

  const bool well_formed = result.x_agg.rows() == cfg.d && result.x_agg.cols() == cfg.m &&
                           result.sigma_agg.size() == cfg.m && pp.dimension() == cfg.d;
  if (!well_formed) {
    verdict.reasons.assign(cfg.m, mklha::RejectReason::KeySetMismatch);
    return verdict;
  }

  std::vector<Rng> column_rngs;
  column_rngs.reserve(cfg.m);
  Rng base = rng != nullptr ? rng->derive("verify") : Rng();
  for (std::size_t j = 0; j < cfg.m; ++j) column_rngs.push_back(base.derive("column", j));

  const Split split = split_workers(cfg.workers, cfg.m);
  parallel_for(cfg.m, split.outer, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      mklha::VerifyOptions opts;
      opts.mode = mode;
      opts.par = {cfg.subcolumns, split.inner};
      opts.rng = &column_rngs[j];
      const auto res = mklha::verify(pp, vks, cfg.label(round, j), result.x_agg.column(j), result.sigma_agg[j], opts);
      verdict.column_ok[j] = res.accepted;
      verdict.reasons[j] = res.reason;
    }
  });

  verdict.accepted = std::all_of(verdict.column_ok.begin(), verdict.column_ok.end(), [](bool ok) { return ok; });
  if (verdict.accepted) {
    const Codec codec = cfg.codec();
    RealMatrix model(cfg.d, cfg.m);
    for (std::size_t k = 0; k < model.data().size(); ++k) {
      model.data()[k] = codec.divide_by_count(result.x_agg.data()[k], cfg.active.size());
    }
    verdict.model = std::move(model);
  }
  return verdict;
}

// ---- wire encodings -------------------------------------------------------

Bytes serialize(const ClientUpdate& update) {
  ByteWriter w;
  w.raw(as_bytes("VCU1"));
  w.u64(update.owner.value);
  w.u64(update.round);
  w.raw(update.config_hash);
  put_matrix(w, update.masked.entries);
  w.u32(static_cast<std::uint32_t>(update.authenticators.size()));
  for (const auto& a : update.authenticators) w.raw(mklha::serialize(a));
  return std::move(w).take();
}

ClientUpdate deserialize_client_update(ByteView bytes) {
  ByteReader r(bytes);
  expect_magic(r, "VCU1");
  ClientUpdate u;
  u.owner.value = r.u64();
  u.round = r.u64();
  const ByteView h = r.raw(32);
  std::copy(h.begin(), h.end(), u.config_hash.begin());
  u.masked = {get_matrix(r), u.round, u.owner};
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * mklha::Authenticator::kSerializedBytes) {
    throw DeserializationError("authenticator block length mismatch");
  }
  for (std::uint32_t k = 0; k < n; ++k) {
    u.authenticators.push_back(mklha::deserialize_authenticator(r.raw(mklha::Authenticator::kSerializedBytes)));
  }
  return u;
}

Bytes serialize(const AggregateResult& result) {
  ByteWriter w;
  w.raw(as_bytes("VAR1"));
  w.u64(result.round);
  w.u32(static_cast<std::uint32_t>(result.active.size()));
  for (const Identity id : result.active) w.u64(id.value);
  put_matrix(w, result.x_agg);
  w.u32(static_cast<std::uint32_t>(result.sigma_agg.size()));
  for (const auto& s : result.sigma_agg) {
    const Bytes b = mklha::serialize(s);
    w.u32(static_cast<std::uint32_t>(b.size()));
    w.raw(b);
  }
  return std::move(w).take();
}

AggregateResult deserialize_aggregate_result(ByteView bytes) {
  ByteReader r(bytes);
  expect_magic(r, "VAR1");
  AggregateResult out;
  out.round = r.u64();
  const std::uint32_t n = r.u32();
  if (n > r.remaining() / 8) throw DeserializationError("active set larger than message");
  for (std::uint32_t k = 0; k < n; ++k) out.active.push_back(Identity{r.u64()});
  out.x_agg = get_matrix(r);
  const std::uint32_t m = r.u32();
  for (std::uint32_t j = 0; j < m; ++j) {
    const std::uint32_t len = r.u32();
    out.sigma_agg.push_back(mklha::deserialize_aggregated(r.raw(len)));
  }
  if (!r.done()) throw DeserializationError("trailing bytes after aggregate result");
  return out;
}

}  // namespace vfl::protocol
