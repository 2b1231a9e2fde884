#include "vfl/adversary.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include "vfl/errors.hpp"
#include "vfl/round.hpp"

namespace vfl::adversary {

namespace {

struct ModeName {
  TamperMode mode;
  std::string_view canonical;
  std::string_view cli;
};

constexpr ModeName kNames[] = {
    {TamperMode::AddE, "AddE", "add-e"},
    {TamperMode::ReplaceWithE, "ReplaceWithE", "replace-with-e"},
    {TamperMode::InjectForgedSigner, "InjectForgedSigner", "inject-forged-signer"},
    {TamperMode::OmitClient, "OmitClient", "omit-client"},
    {TamperMode::WrongKeySet, "WrongKeySet", "wrong-key-set"},
    {TamperMode::ReplayPreviousRound, "ReplayPreviousRound", "replay-previous-round"},
    {TamperMode::SwapColumns, "SwapColumns", "swap-columns"},
};

FieldVector injected_vector(const TamperSpec& spec, std::size_t d, Rng& rng) {
  if (spec.e) {
    FieldVector e = *spec.e;
    e.resize(d);
    return e;
  }
  FieldVector e(d);
  for (auto& v : e) v = rng.field();
  if (std::all_of(e.begin(), e.end(), [](const FieldScalar& v) { return v.is_zero(); })) e[0] = FieldScalar::one();
  return e;
}

Identity pick_target(const TamperSpec& spec, const protocol::SessionConfig& cfg, Rng& rng) {
  if (spec.target_client &&
      std::find(cfg.active.begin(), cfg.active.end(), *spec.target_client) != cfg.active.end()) {
    return *spec.target_client;
  }
  return cfg.active[rng.uniform(0, cfg.active.size() - 1)];
}

const mklha::Authenticator* find_authenticator(const AdversaryView& view, Identity id, std::size_t column) {
  for (const auto& u : view.updates) {
    if (u.owner == id && column < u.authenticators.size()) return &u.authenticators[column];
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(TamperMode mode) {
  for (const auto& n : kNames) {
    if (n.mode == mode) return n.canonical;
  }
  return "unknown";
}

TamperMode parse_mode(std::string_view name) {
  for (const auto& n : kNames) {
    if (name == n.canonical || name == n.cli) return n.mode;
  }
  throw InvalidArgument("unknown tamper mode '" + std::string(name) + "'");
}

protocol::AggregateResult apply(const TamperSpec& spec, const protocol::SessionConfig& cfg,
                                const mklha::PublicParams& pp, const protocol::AggregateResult& honest,
                                const AdversaryView& view) {
  protocol::AggregateResult out = honest;
  const std::size_t m = out.x_agg.cols();
  const std::size_t d = out.x_agg.rows();
  if (m == 0 || d == 0 || out.sigma_agg.size() != m) return out;

  Rng local;
  Rng& rng = view.rng != nullptr ? *view.rng : local;
  const std::size_t col = spec.target_column.value_or(0) % m;
  const mklha::Label label = cfg.label(honest.round, col);

  switch (spec.mode) {
    case TamperMode::AddE: {
      const FieldVector e = injected_vector(spec, d, rng);
      add_assign(out.x_agg.column(col), e);
      break;
    }
    case TamperMode::ReplaceWithE: {
      const FieldVector e = injected_vector(spec, d, rng);
      std::copy(e.begin(), e.end(), out.x_agg.column(col).begin());
      break;
    }
    case TamperMode::InjectForgedSigner: {
      // Fresh identity outside S with a key the aggregator made itself; the
      // forged authenticator is internally consistent with x + e.
      Identity forged{0};
      for (const Identity id : cfg.active) forged.value = std::max(forged.value, id.value + 1);
      if (spec.target_client &&
          std::find(cfg.active.begin(), cfg.active.end(), *spec.target_client) == cfg.active.end()) {
        forged = *spec.target_client;
      }
      const auto kp = mklha::keygen(pp, forged, rng);
      const FieldVector e = injected_vector(spec, d, rng);
      const auto sigma_e = mklha::auth(pp, kp.sk, label, e, rng);
      add_assign(out.x_agg.column(col), e);
      out.sigma_agg[col].per_identity[forged] = {sigma_e.lambda, sigma_e.commit};
      out.sigma_agg[col].s_agg += sigma_e.s;
      break;
    }
    case TamperMode::OmitClient: {
      const Identity target = pick_target(spec, cfg, rng);
      for (std::size_t j = 0; j < m; ++j) {
        out.sigma_agg[j].per_identity.erase(target);
        if (const auto* sigma = find_authenticator(view, target, j)) out.sigma_agg[j].s_agg += -sigma->s;
      }
      break;
    }
    case TamperMode::WrongKeySet: {
      // The target keeps its identity but its components now verify only
      // under a key the board never saw.
      const Identity target = pick_target(spec, cfg, rng);
      const auto kp = mklha::keygen(pp, target, rng);
      const FieldVector e = injected_vector(spec, d, rng);
      const auto forged = mklha::auth(pp, kp.sk, label, e, rng);
      if (const auto* sigma = find_authenticator(view, target, col)) out.sigma_agg[col].s_agg += -sigma->s;
      out.sigma_agg[col].per_identity[target] = {forged.lambda, forged.commit};
      out.sigma_agg[col].s_agg += forged.s;
      add_assign(out.x_agg.column(col), e);
      break;
    }
    case TamperMode::ReplayPreviousRound: {
      if (view.previous == nullptr) break;
      out = *view.previous;
      out.round = honest.round;
      out.active = honest.active;
      break;
    }
    case TamperMode::SwapColumns: {
      if (m < 2) break;
      const std::size_t other = spec.second_column.value_or(col + 1) % m;
      if (other == col) break;
      auto a = out.x_agg.column(col);
      auto b = out.x_agg.column(other);
      std::swap_ranges(a.begin(), a.end(), b.begin());
      std::swap(out.sigma_agg[col], out.sigma_agg[other]);
      break;
    }
  }
  return out;
}

bool DetectionReport::all_detected() const {
  return std::all_of(modes.begin(), modes.end(), [](const DetectionRow& r) { return r.detected == r.trials; });
}

void DetectionReport::write_csv(std::ostream& os) const {
  os << "mode,trials,detected,rate\n";
  for (const auto& r : modes) os << r.mode << ',' << r.trials << ',' << r.detected << ',' << r.rate() << '\n';
  os << "honest," << honest_trials << ',' << false_rejects << ','
     << (honest_trials == 0 ? 0.0 : static_cast<double>(false_rejects) / honest_trials) << '\n';
}

namespace {

protocol::SessionConfig random_config(const SuiteOptions& opts, Rng& rng) {
  protocol::SessionConfig cfg;
  const std::size_t n = rng.uniform(2, std::max<std::size_t>(2, opts.max_clients));
  cfg.d = rng.uniform(1, std::max<std::size_t>(1, opts.max_d));
  cfg.m = rng.uniform(2, std::max<std::size_t>(2, opts.max_m));
  cfg.precision = Precision(4);
  cfg.bounds = {1.0, static_cast<std::uint32_t>(n)};
  for (std::size_t k = 0; k < n; ++k) cfg.active.push_back(Identity{k + 1});
  cfg.session_tag.resize(16);
  rng.fill(cfg.session_tag);
  cfg.subcolumns = rng.uniform(1, 2);
  cfg.workers = opts.workers;
  return cfg;
}

// True iff every verifying client rejected.
bool run_trial(const SuiteOptions& opts, std::optional<TamperSpec> tamper, Rng& rng) {
  auto cfg = random_config(opts, rng);
  auto world = protocol::make_world(cfg, rng);
  std::uint64_t round = 1;
  protocol::RoundOptions ro;
  ro.verifiers = opts.verifiers;
  if (tamper && tamper->mode == TamperMode::ReplayPreviousRound) {
    protocol::RoundOptions staging;
    staging.skip_verification = true;
    protocol::run_round(world, round, protocol::synthetic_updates(world.cfg, rng), staging);
    ++round;
  }
  if (tamper) {
    tamper->target_client = world.cfg.active[rng.uniform(0, world.cfg.active.size() - 1)];
    tamper->target_column = rng.uniform(0, world.cfg.m - 1);
  }
  ro.tamper = tamper;
  const auto t = protocol::run_round(world, round, protocol::synthetic_updates(world.cfg, rng), ro);
  return std::none_of(t.verdicts.begin(), t.verdicts.end(), [](const auto& kv) { return kv.second.accepted; });
}

}  // namespace

DetectionReport detection_suite(const SuiteOptions& opts, Rng& rng) {
  if (opts.trials == 0) throw InvalidArgument("trials must be at least 1");
  DetectionReport report;
  for (const TamperMode mode : opts.modes) {
    DetectionRow row{std::string(to_string(mode)), opts.trials, 0};
    for (std::size_t t = 0; t < opts.trials; ++t) {
      Rng trial_rng = rng.derive(to_string(mode), t);
      TamperSpec spec;
      spec.mode = mode;
      if (run_trial(opts, spec, trial_rng)) ++row.detected;
    }
    report.modes.push_back(row);
  }
  report.honest_trials = opts.trials;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    Rng trial_rng = rng.derive("honest", t);
    if (run_trial(opts, std::nullopt, trial_rng)) ++report.false_rejects;
  }
  return report;
}

}  // namespace vfl::adversary
