#include <cli11/CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vfl/adversary.hpp"
#include "vfl/cli/bench.hpp"
#include "vfl/cli/commands.hpp"
#include "vfl/cli/config.hpp"
#include "vfl/errors.hpp"

using namespace vfl;
using namespace vfl::cli;

namespace {

std::vector<BenchRecord> run_bench(const std::string& op, const std::vector<std::size_t>& d_values,
                                   const std::vector<std::size_t>& client_counts,
                                   const std::vector<std::size_t>& thread_counts, const BenchOptions& opts) {
  if (op == "auth") return bench_auth(d_values, opts);
  if (op == "eval") return bench_eval(client_counts, opts);
  if (op == "verify") return bench_verify(d_values, opts);
  if (op == "mask") return bench_mask(d_values, opts);
  if (op == "unmask") return bench_unmask(d_values, opts);
  if (op == "round") return bench_round(d_values, opts);
  if (op == "size") return bench_size(d_values, opts);
  if (op == "aggregate-size") return bench_aggregate_size(client_counts, opts);
  if (op == "threads") {
    // Thread sweep runs at a single column length: the first --d value.
    BenchOptions o = opts;
    o.d = d_values.at(0);
    return bench_threads(thread_counts, o);
  }
  throw InvalidArgument("unknown bench operation: " + op);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable federated aggregation with multi-key homomorphic authenticators"};
  app.require_subcommand(1);

  // setup
  SessionFile session;
  std::string out_dir = "vfl-session";
  bool force = false;
  std::size_t threads = 0;
  auto* setup = app.add_subcommand("setup", "Trusted setup: params, keys, pairwise secrets, board");
  setup->add_option("--clients", session.clients, "Number of clients")->check(CLI::PositiveNumber);
  setup->add_option("--d", session.d, "Rows per column (model parameters per column)")->check(CLI::PositiveNumber);
  setup->add_option("--m", session.m, "Number of columns")->check(CLI::PositiveNumber);
  setup->add_option("--dp", session.dp, "Decimal places kept by the codec")->check(CLI::Range(1, 12));
  setup->add_option("--subcolumns", session.subcolumns, "MSM partitions per column")->check(CLI::PositiveNumber);
  setup->add_option("--max-abs", session.max_abs, "Largest accepted |weight|")->check(CLI::PositiveNumber);
  setup->add_option("--seed", session.seed, "Hex seed; fixes keys, secrets and updates");
  setup->add_option("--out", out_dir, "Output directory");
  setup->add_flag("--force", force, "Overwrite an existing session");
  setup->add_option("--threads", threads, "Worker threads (default VFL_THREADS or all cores)");

  // round
  RoundCommandOptions round_opts;
  std::string round_dir = "vfl-session";
  std::string tamper;
  auto* round = app.add_subcommand("round", "Run one aggregation round over a setup directory");
  round->add_option("--out", round_dir, "Setup directory");
  round->add_option("--round", round_opts.round, "Round number")->check(CLI::PositiveNumber);
  round->add_option("--tamper", tamper, "Aggregator misbehaviour (add-e, replace-with-e, ...)");
  round->add_option("--verifiers", round_opts.verifiers, "Clients that verify (0 = all)");
  round->add_option("--threads", threads, "Worker threads");

  // bench
  std::string op = "auth";
  std::vector<std::size_t> d_values{10000, 100000, 500000, 1000000};
  std::vector<std::size_t> client_counts{100, 500, 1000};
  std::vector<std::size_t> thread_counts{1, 2, 4};
  BenchOptions bench_opts;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Timing and size sweeps as CSV");
  bench->add_option("operation", op, "auth|eval|verify|mask|unmask|round|size|aggregate-size|threads");
  bench->add_option("--d", d_values, "Sweep over d (auth, verify, mask, unmask, round, size)")->delimiter(',');
  bench->add_option("--clients", client_counts, "Sweep over client counts (eval, aggregate-size)")->delimiter(',');
  bench->add_option("--thread-sweep", thread_counts, "Sweep over worker counts (threads)")->delimiter(',');
  bench->add_option("--m", bench_opts.m, "Columns")->check(CLI::PositiveNumber);
  bench->add_option("--subcolumns", bench_opts.subcolumns, "MSM partitions per column")->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_opts.repetitions, "Repetitions per point (at least 10)");
  bench->add_option("--seed", bench_opts.seed, "Hex seed");
  bench->add_option("--threads", threads, "Worker threads");
  bench->add_option("--out", bench_out, "CSV file (default stdout)");

  // adversary
  AdversaryCommandOptions adv_opts;
  std::string adv_out;
  std::vector<std::string> modes;
  auto* adv = app.add_subcommand("adversary", "Randomized tamper-detection suite");
  adv->add_option("--trials", adv_opts.suite.trials, "Trials per mode")->check(CLI::PositiveNumber);
  adv->add_option("--clients", adv_opts.suite.max_clients, "Largest active set")->check(CLI::Range(2, 1 << 16));
  adv->add_option("--d", adv_opts.suite.max_d, "Largest d")->check(CLI::PositiveNumber);
  adv->add_option("--m", adv_opts.suite.max_m, "Largest m")->check(CLI::Range(2, 1 << 16));
  adv->add_option("--tamper", modes, "Restrict to these modes")->delimiter(',');
  adv->add_option("--verifiers", adv_opts.suite.verifiers, "Verifying clients per round (0 = all)");
  adv->add_option("--seed", adv_opts.seed, "Hex seed");
  adv->add_option("--threads", threads, "Worker threads");
  adv->add_option("--out", adv_out, "CSV file (default stdout)");

  // selftest
  SelftestOptions self_opts;
  auto* self = app.add_subcommand("selftest", "Small-scale invariant checks");
  self->add_flag("--disable-subgroup-checks", self_opts.disable_subgroup_checks,
                 "Negative-test hook: turn off subgroup checks (the run must fail)");
  self->add_option("--threads", threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::size_t workers = resolve_threads(threads);
    if (*setup) {
      SetupOptions o{session, out_dir, force, workers};
      const auto s = cmd_setup(o);
      std::cout << "wrote " << s.key_files << " key pairs, " << s.board_entries << " board entries, "
                << s.pairwise_records << " pairwise records to " << out_dir << '\n';
      return kExitAccept;
    }
    if (*round) {
      round_opts.dir = round_dir;
      round_opts.threads = workers;
      if (!tamper.empty()) round_opts.tamper = adversary::parse_mode(tamper);
      const auto outcome = cmd_round(round_opts);
      print_timing_table(std::cout, outcome.transcript);
      std::cout << "transcript: " << outcome.transcript_path.string() << '\n';
      return outcome.exit_code;
    }
    if (*bench) {
      bench_opts.threads = workers;
      if (bench_opts.repetitions < kMinRepetitions) throw InvalidArgument("--reps must be at least 10");
      const auto rows = run_bench(op, d_values, client_counts, thread_counts, bench_opts);
      std::ofstream file;
      if (!bench_out.empty()) {
        file.open(bench_out);
        if (!file) throw IoError("cannot write " + bench_out);
      }
      std::ostream& os = bench_out.empty() ? std::cout : file;
      write_csv_header(os);
      write_csv(os, rows);
      return kExitAccept;
    }
    if (*adv) {
      adv_opts.suite.workers = workers;
      if (!modes.empty()) {
        adv_opts.suite.modes.clear();
        for (const auto& m : modes) adv_opts.suite.modes.push_back(adversary::parse_mode(m));
      }
      const auto report = cmd_adversary(adv_opts);
      std::ofstream file;
      if (!adv_out.empty()) {
        file.open(adv_out);
        if (!file) throw IoError("cannot write " + adv_out);
      }
      report.write_csv(adv_out.empty() ? std::cout : file);
      return report.all_detected() && report.false_rejects == 0 ? kExitAccept : kExitUndetected;
    }
    if (*self) {
      self_opts.threads = workers;
      return cmd_selftest(self_opts, std::cout) ? kExitAccept : kExitError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
