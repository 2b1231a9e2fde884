#include <fstream>

#include "vfl/board.hpp"
#include "vfl/cli/commands.hpp"
#include "vfl/errors.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"

namespace vfl::cli {

namespace fs = std::filesystem;

SetupSummary cmd_setup(const SetupOptions& opts) {
  const SetupPaths paths{opts.out};
  if (fs::exists(paths.config())) {
    if (!opts.force) {
      throw ConfigurationError("a session is already provisioned in " + opts.out.string() +
                               " (pass --force to overwrite)");
    }
    for (const auto& p : {paths.config(), paths.params(), paths.secrets(), paths.board()}) fs::remove(p);
    fs::remove_all(paths.keys());
  }
  // Every file is written before config.txt, so a half-finished setup can
  // be retried without --force.
  fs::remove(paths.board());
  fs::create_directories(paths.keys());

  const protocol::SessionConfig cfg = opts.session.to_session(opts.threads);
  Rng rng(opts.session.seed_bytes());
  auto board = std::make_shared<board::FileBoard>(paths.board());
  const protocol::World world = protocol::make_world(cfg, rng, board);

  SetupSummary summary;
  maskagg::PairwiseSecrets all;
  for (const auto& client : world.clients) {
    const auto vk = board->get(client.id);
    mklha::write_secret_key(paths.secret_key(client.id), client.id, client.sk);
    const mklha::VerificationKey keys[] = {*vk};
    mklha::write_verification_keys(paths.verification_key(client.id), keys);
    ++summary.key_files;
    for (const auto& rec : client.secrets.records()) {
      if (!all.find(rec.u, rec.v)) all.insert(rec.u, rec.v, rec.seed);
    }
  }
  maskagg::write_secrets_file(paths.secrets(), all);
  summary.pairwise_records = all.size();
  summary.board_entries = board->size();

  std::ofstream params(paths.params(), std::ios::trunc);
  if (!params) throw IoError("cannot write " + paths.params().string());
  params << "curve = " << mklha::kCurveName << '\n'
         << "lambda = " << world.pp.security_level() << '\n'
         << "d = " << world.pp.dimension() << '\n'
         << "session_tag = " << to_hex(world.pp.session_tag()) << '\n'
         << "blind = " << to_hex(world.pp.blind().compress()) << '\n'
         << "digest = " << to_hex(world.pp.digest()) << '\n';
  if (!params) throw IoError("write failed: " + paths.params().string());

  write_session_file(paths.config(), opts.session);
  return summary;
}

}  // namespace vfl::cli
