#include "vfl/round.hpp"

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "vfl/errors.hpp"

namespace vfl::protocol {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t micros_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

std::string party(Identity id) { return "client:" + id.str(); }

Bytes encode_verdict(const Verdict& v) {
  ByteWriter w;
  w.u8(v.accepted ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(v.column_ok.size()));
  for (bool ok : v.column_ok) w.u8(ok ? 1 : 0);
  if (v.model) {
    for (double x : v.model->data()) w.u64(std::bit_cast<std::uint64_t>(x));
  }
  return std::move(w).take();
}

}  // namespace

World make_world(SessionConfig cfg, Rng& rng, std::shared_ptr<board::BulletinBoard> board) {
  cfg.validate();
  if (!board) board = std::make_shared<board::MemoryBoard>();
  World world{cfg, mklha::setup(mklha::kSecurityLevel, cfg.d, cfg.session_tag, cfg.workers), {}, board,
              rng.derive("aggregator"), std::nullopt};
  Rng pair_rng = rng.derive("pairwise");
  const maskagg::PairwiseSecrets secrets = maskagg::provision(cfg.active, pair_rng);
  for (const Identity id : cfg.active) {
    Rng key_rng = rng.derive("keygen", id.value);
    auto kp = mklha::keygen(world.pp, id, key_rng);
    board->register_entry({id, kp.vk, 0});
    world.clients.push_back({id, kp.sk, secrets.view_for(id), rng.derive("client", id.value)});
  }
  return world;
}

bool RoundTranscript::accepted() const {
  if (verdicts.empty()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second.accepted; });
}

void RoundTranscript::write_jsonl(std::ostream& os) const {
  for (const auto& m : messages) {
    nlohmann::ordered_json j;
    j["phase"] = m.phase;
    j["sender"] = m.sender;
    j["receiver"] = m.receiver;
    j["bytes"] = m.bytes;
    j["duration_us"] = m.duration_us;
    j["payload_hash"] = m.payload_hash;
    os << j.dump() << '\n';
  }
}

RoundTranscript run_round(World& world, std::uint64_t round, const std::map<Identity, RealMatrix>& plain,
                          const RoundOptions& opts) {
  const SessionConfig& cfg = world.cfg;
  cfg.validate();
  RoundTranscript t;
  t.round = round;

  // Phase 1: client preparation.
  std::vector<ClientUpdate> updates;
  updates.reserve(world.clients.size());
  const auto phase1 = Clock::now();
  for (auto& client : world.clients) {
    const auto it = plain.find(client.id);
    if (it == plain.end()) throw ProtocolError("no plain update supplied for client " + client.id.str());
    const auto start = Clock::now();
    ClientUpdate u = client_prepare(cfg, world.pp, client, it->second, round);
    const std::int64_t took = micros_since(start);
    const Bytes wire = serialize(u);
    t.messages.push_back({"prepare", party(client.id), "aggregator", wire.size(), took, to_hex(sha256(wire))});
    updates.push_back(std::move(u));
  }
  t.prepare_us = micros_since(phase1);

  // Phase 2: aggregation; nothing is published until every update is in.
  const auto phase2 = Clock::now();
  const AggregateResult honest = aggregate(cfg, world.pp, updates);
  AggregateResult broadcast = honest;
  if (opts.tamper) {
    adversary::AdversaryView view{updates, world.last_result ? &*world.last_result : nullptr, &world.aggregator_rng};
    broadcast = adversary::apply(*opts.tamper, cfg, world.pp, honest, view);
  }
  t.aggregate_us = micros_since(phase2);
  const Bytes wire = serialize(broadcast);
  const std::string wire_hash = to_hex(sha256(wire));
  for (const auto& client : world.clients) {
    t.messages.push_back({"aggregate", "aggregator", party(client.id), wire.size(), t.aggregate_us, wire_hash});
  }
  world.last_result = broadcast;

  // Phase 3: client verification against board keys.
  const auto phase3 = Clock::now();
  const auto snapshot = world.board->snapshot(cfg.active);
  std::size_t verifiers =
      opts.verifiers == 0 ? world.clients.size() : std::min(opts.verifiers, world.clients.size());
  if (opts.skip_verification) verifiers = 0;
  for (std::size_t k = 0; k < verifiers; ++k) {
    auto& client = world.clients[k];
    const auto start = Clock::now();
    Verdict v = client_verify(cfg, world.pp, snapshot, broadcast, round, opts.verify_mode, &client.rng);
    const std::int64_t took = micros_since(start);
    const Bytes enc = encode_verdict(v);
    t.messages.push_back({"verify", party(client.id), party(client.id), enc.size(), took, to_hex(sha256(enc))});
    t.verdicts.emplace(client.id, std::move(v));
  }
  t.verify_us = micros_since(phase3);
  t.result = std::move(broadcast);
  return t;
}

std::map<Identity, RealMatrix> synthetic_updates(const SessionConfig& cfg, Rng& rng, double bound) {
  std::map<Identity, RealMatrix> out;
  for (const Identity id : cfg.active) {
    RealMatrix x(cfg.d, cfg.m);
    for (auto& v : x.data()) v = (2.0 * rng.next_unit() - 1.0) * bound;
    out.emplace(id, std::move(x));
  }
  return out;
}

}  // namespace vfl::protocol
