#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "vfl/board.hpp"
#include "vfl/cli/commands.hpp"
#include "vfl/errors.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"

namespace vfl::cli {

namespace {

std::string params_digest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("digest = ", 0) == 0) return line.substr(9);
  }
  throw DeserializationError(path.string() + ": no digest line");
}

}  // namespace

RoundOutcome cmd_round(const RoundCommandOptions& opts) {
  const SetupPaths paths{opts.dir};
  if (!std::filesystem::exists(paths.config())) {
    throw ConfigurationError("no session in " + opts.dir.string() + " (run setup first)");
  }
  const SessionFile session = read_session_file(paths.config());
  const protocol::SessionConfig cfg = session.to_session(opts.threads);
  const Rng root(session.seed_bytes());

  auto board = std::make_shared<board::FileBoard>(paths.board());
  auto pp = mklha::setup(mklha::kSecurityLevel, cfg.d, cfg.session_tag, cfg.workers);
  if (to_hex(pp.digest()) != params_digest(paths.params())) {
    throw ConfigurationError("public parameters do not match " + paths.params().string());
  }
  const maskagg::PairwiseSecrets secrets = maskagg::read_secrets_file(paths.secrets());

  protocol::World world{cfg, std::move(pp), {}, board, root.derive("aggregator", opts.round), std::nullopt};
  for (const Identity id : cfg.active) {
    const auto kp = mklha::read_secret_key(paths.secret_key(id));
    if (kp.id != id) throw ConfigurationError("key file for client " + id.str() + " names another identity");
    const auto registered = board->get(id);
    if (!registered || !(*registered == kp.vk)) {
      throw ConfigurationError("client " + id.str() + " key does not match the board");
    }
    world.clients.push_back({id, kp.sk, secrets.view_for(id), root.derive("client", id.value, opts.round)});
  }

  protocol::RoundOptions ro;
  ro.verifiers = opts.verifiers;
  if (opts.tamper) {
    ro.tamper = adversary::TamperSpec{};
    ro.tamper->mode = *opts.tamper;
    if (*opts.tamper == adversary::TamperMode::ReplayPreviousRound) {
      if (opts.round == 0) throw InvalidArgument("replay needs a previous round; use --round >= 1");
      Rng staged = root.derive("updates", opts.round - 1);
      protocol::RoundOptions staging;
      staging.skip_verification = true;
      protocol::run_round(world, opts.round - 1, protocol::synthetic_updates(cfg, staged), staging);
    }
  }

  Rng update_rng = root.derive("updates", opts.round);
  RoundOutcome outcome;
  outcome.transcript = protocol::run_round(world, opts.round, protocol::synthetic_updates(cfg, update_rng), ro);
  outcome.transcript_path = paths.transcript(opts.round);
  std::ofstream out(outcome.transcript_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + outcome.transcript_path.string());
  outcome.transcript.write_jsonl(out);
  outcome.exit_code = outcome.transcript.accepted() ? kExitAccept : kExitReject;
  return outcome;
}

void print_timing_table(std::ostream& os, const protocol::RoundTranscript& t) {
  std::size_t up = 0;
  std::size_t down = 0;
  for (const auto& m : t.messages) {
    if (m.phase == "prepare") up += m.bytes;
    if (m.phase == "aggregate") down += m.bytes;
  }
  os << std::left << std::setw(12) << "phase" << std::right << std::setw(14) << "time_ms" << std::setw(16)
     << "bytes" << '\n';
  auto row = [&](const char* name, std::int64_t us, std::size_t bytes) {
    os << std::left << std::setw(12) << name << std::right << std::setw(14) << std::fixed << std::setprecision(3)
       << static_cast<double>(us) / 1000.0 << std::setw(16) << bytes << '\n';
  };
  row("prepare", t.prepare_us, up);
  row("aggregate", t.aggregate_us, down);
  row("verify", t.verify_us, 0);
  std::size_t rejecting = 0;
  for (const auto& [id, v] : t.verdicts) rejecting += v.accepted ? 0 : 1;
  os << "verdict: " << (t.accepted() ? "accept" : "reject") << " (" << t.verdicts.size() << " verifiers, "
     << rejecting << " rejecting)\n";
  for (const auto& [id, v] : t.verdicts) {
    if (v.accepted) continue;
    os << "  client " << id.str() << " rejected columns:";
    for (auto j : v.failing_columns()) os << ' ' << j << '(' << mklha::to_string(v.reasons[j]) << ')';
    os << '\n';
  }
}

adversary::DetectionReport cmd_adversary(const AdversaryCommandOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  return adversary::detection_suite(opts.suite, rng);
}

}  // namespace vfl::cli
