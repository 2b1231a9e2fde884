#include "vfl/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "vfl/codec.hpp"
#include "vfl/errors.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"
#include "vfl/parallel.hpp"
#include "vfl/round.hpp"

namespace vfl::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct Timing {
  double mean_us = 0.0;
  double stddev_us = 0.0;
};

Timing time_reps(std::size_t reps, const std::function<void()>& fn) {
  reps = std::max(reps, kMinRepetitions);
  fn();  // warm-up, not recorded
  std::vector<double> samples;
  samples.reserve(reps);
  for (std::size_t k = 0; k < reps; ++k) {
    const auto start = Clock::now();
    fn();
    samples.push_back(std::chrono::duration<double, std::micro>(Clock::now() - start).count());
  }
  Timing t;
  for (double s : samples) t.mean_us += s;
  t.mean_us /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - t.mean_us) * (s - t.mean_us);
  t.stddev_us = samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;
  return t;
}

Bytes bench_tag(const BenchOptions& opts) {
  const Seed s = seed_from_hex(opts.seed);
  return Bytes(s.begin(), s.begin() + 16);
}

mklha::PublicParams params_for(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  if (d_values.empty()) throw InvalidArgument("empty sweep");
  const std::size_t max_d = *std::max_element(d_values.begin(), d_values.end());
  if (opts.params && opts.params->dimension() >= max_d) return *opts.params;
  return mklha::setup(mklha::kSecurityLevel, max_d, bench_tag(opts), opts.threads);
}

// Encoded uniform reals in [-1, 1]: full-width field elements for negatives,
// as in a real model update.
FieldVector random_column(std::size_t d, Rng& rng) {
  const Codec codec(Precision(Precision::kDefault), EncodingBounds{1.0, 1u << 20});
  FieldVector x(d);
  for (auto& v : x) v = codec.encode(2.0 * rng.next_unit() - 1.0);
  return x;
}

BenchRecord record(std::string op, std::size_t d, std::size_t m, std::size_t clients, const BenchOptions& opts,
                   const Timing& t, std::size_t bytes) {
  BenchRecord r;
  r.operation = std::move(op);
  r.d = d;
  r.m = m;
  r.clients = clients;
  r.subcolumns = opts.subcolumns;
  r.threads = opts.threads;
  r.mean_us = t.mean_us;
  r.stddev_us = t.stddev_us;
  r.bytes = bytes;
  r.repetitions = std::max(opts.repetitions, kMinRepetitions);
  return r;
}

}  // namespace

std::vector<BenchRecord> bench_auth(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const auto pp_max = params_for(d_values, opts);
  const auto kp = mklha::keygen(pp_max, Identity{1}, rng);
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    const auto pp = pp_max.prefix(d);
    const FieldVector x = random_column(d, rng);
    const mklha::Label label{pp.session_tag(), 1, 0};
    mklha::Authenticator sigma;
    const Timing t = time_reps(opts.repetitions, [&] {
      sigma = mklha::auth(pp, kp.sk, label, x, rng, {opts.subcolumns, opts.threads});
    });
    rows.push_back(record("auth", d, 1, 1, opts, t, mklha::serialize(sigma).size()));
  }
  return rows;
}

std::vector<BenchRecord> bench_eval(const std::vector<std::size_t>& client_counts, const BenchOptions& opts) {
  if (client_counts.empty()) throw InvalidArgument("empty sweep");
  Rng rng(seed_from_hex(opts.seed));
  const std::size_t max_n = *std::max_element(client_counts.begin(), client_counts.end());
  const std::size_t d = 1;
  const auto pp = mklha::setup(mklha::kSecurityLevel, d, bench_tag(opts), opts.threads);
  // columns[j][id] = authenticator of client id on column j
  std::vector<std::map<Identity, mklha::Authenticator>> columns(opts.m);
  for (std::size_t k = 1; k <= max_n; ++k) {
    const auto kp = mklha::keygen(pp, Identity{k}, rng);
    for (std::size_t j = 0; j < opts.m; ++j) {
      const FieldVector x = random_column(d, rng);
      columns[j].emplace(Identity{k}, mklha::auth(pp, kp.sk, {pp.session_tag(), 1, j}, x, rng));
    }
  }
  std::vector<BenchRecord> rows;
  for (const std::size_t n : client_counts) {
    std::vector<std::map<Identity, mklha::Authenticator>> subset(opts.m);
    for (std::size_t j = 0; j < opts.m; ++j) {
      auto end = columns[j].begin();
      std::advance(end, static_cast<std::ptrdiff_t>(std::min(n, columns[j].size())));
      subset[j].insert(columns[j].begin(), end);
    }
    std::vector<mklha::AggregatedAuthenticator> agg(opts.m);
    const Timing t = time_reps(opts.repetitions, [&] {
      parallel_for(opts.m, opts.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) agg[j] = mklha::eval(pp, subset[j]);
      });
    });
    rows.push_back(record("eval", d, opts.m, n, opts, t, mklha::serialize(agg.front()).size()));
  }
  return rows;
}

std::vector<BenchRecord> bench_verify(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const auto pp_max = params_for(d_values, opts);
  const std::size_t n = std::max<std::size_t>(1, opts.clients);
  std::vector<mklha::KeyPair> keys;
  std::map<Identity, mklha::VerificationKey> vks;
  for (std::size_t k = 1; k <= n; ++k) {
    keys.push_back(mklha::keygen(pp_max, Identity{k}, rng));
    vks.emplace(Identity{k}, keys.back().vk);
  }
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    const auto pp = pp_max.prefix(d);
    const mklha::Label label{pp.session_tag(), 1, 0};
    std::map<Identity, mklha::Authenticator> sigmas;
    FieldVector sum(d);
    for (const auto& kp : keys) {
      const FieldVector x = random_column(d, rng);
      add_assign(sum, x);
      sigmas.emplace(kp.id, mklha::auth(pp, kp.sk, label, x, rng, {opts.subcolumns, opts.threads}));
    }
    const auto agg = mklha::eval(pp, sigmas);
    mklha::VerifyOptions vo;
    vo.par = {opts.subcolumns, opts.threads};
    vo.rng = &rng;
    bool ok = true;
    const Timing t = time_reps(opts.repetitions, [&] { ok = ok && mklha::verify(pp, vks, label, sum, agg, vo).accepted; });
    if (!ok) throw ProtocolError("benchmark verification rejected an honest aggregate");
    rows.push_back(record("verify", d, 1, n, opts, t, mklha::serialize(agg).size()));
  }
  return rows;
}

std::vector<BenchRecord> bench_mask(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const std::size_t n = std::max<std::size_t>(1, opts.clients);
  std::vector<Identity> ids;
  for (std::size_t k = 1; k <= n; ++k) ids.push_back(Identity{k});
  const auto secrets = maskagg::provision(ids, rng);
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    const FieldVector x = random_column(d, rng);
    FieldVector out;
    const Timing t = time_reps(opts.repetitions, [&] { out = maskagg::mask(x, ids.front(), secrets, ids, 1, 0); });
    rows.push_back(record("mask", d, 1, n, opts, t, d * FieldScalar::kBytes));
  }
  return rows;
}

std::vector<BenchRecord> bench_unmask(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const std::size_t n = std::max<std::size_t>(1, opts.clients);
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    std::vector<FieldVector> masked;
    for (std::size_t k = 0; k < n; ++k) masked.push_back(random_column(d, rng));
    std::vector<std::span<const FieldScalar>> views(masked.begin(), masked.end());
    FieldVector out;
    const Timing t = time_reps(opts.repetitions, [&] { out = maskagg::unmask_sum(views, n); });
    rows.push_back(record("unmask", d, 1, n, opts, t, d * FieldScalar::kBytes));
  }
  return rows;
}

std::vector<BenchRecord> bench_round(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    protocol::SessionConfig cfg;
    cfg.d = d;
    cfg.m = opts.m;
    cfg.bounds = {1.0, static_cast<std::uint32_t>(std::max<std::size_t>(1, opts.clients))};
    for (std::size_t k = 1; k <= std::max<std::size_t>(1, opts.clients); ++k) cfg.active.push_back(Identity{k});
    cfg.session_tag = bench_tag(opts);
    cfg.subcolumns = opts.subcolumns;
    cfg.workers = opts.threads;
    auto world = protocol::make_world(cfg, rng);
    std::uint64_t round = 0;
    std::size_t bytes = 0;
    const Timing t = time_reps(opts.repetitions, [&] {
      const auto tr = protocol::run_round(world, ++round, protocol::synthetic_updates(world.cfg, rng));
      if (!tr.accepted()) throw ProtocolError("benchmark round rejected");
      bytes = 0;
      for (const auto& msg : tr.messages) bytes += msg.bytes;
    });
    rows.push_back(record("round", d, opts.m, cfg.active.size(), opts, t, bytes));
  }
  return rows;
}

std::vector<BenchRecord> bench_size(const std::vector<std::size_t>& d_values, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const auto pp_max = params_for(d_values, opts);
  const auto kp = mklha::keygen(pp_max, Identity{1}, rng);
  std::vector<BenchRecord> rows;
  for (const std::size_t d : d_values) {
    const auto pp = pp_max.prefix(d);
    const FieldVector x = random_column(d, rng);
    const auto sigma = mklha::auth(pp, kp.sk, {pp.session_tag(), 1, 0}, x, rng, {opts.subcolumns, opts.threads});
    Bytes wire;
    const Timing t = time_reps(opts.repetitions, [&] { wire = mklha::serialize(sigma); });
    // Round-trip so the reported size is of a decodable encoding.
    if (!(mklha::deserialize_authenticator(wire) == sigma)) throw ProtocolError("authenticator round-trip failed");
    rows.push_back(record("size", d, 1, 1, opts, t, wire.size()));
  }
  return rows;
}

std::vector<BenchRecord> bench_aggregate_size(const std::vector<std::size_t>& client_counts,
                                              const BenchOptions& opts) {
  if (client_counts.empty()) throw InvalidArgument("empty sweep");
  Rng rng(seed_from_hex(opts.seed));
  const auto pp = mklha::setup(mklha::kSecurityLevel, 1, bench_tag(opts));
  const std::size_t max_n = *std::max_element(client_counts.begin(), client_counts.end());
  std::map<Identity, mklha::Authenticator> all;
  for (std::size_t k = 1; k <= max_n; ++k) {
    const auto kp = mklha::keygen(pp, Identity{k}, rng);
    all.emplace(Identity{k}, mklha::auth(pp, kp.sk, {pp.session_tag(), 1, 0}, random_column(1, rng), rng));
  }
  std::vector<BenchRecord> rows;
  for (const std::size_t n : client_counts) {
    auto end = all.begin();
    std::advance(end, static_cast<std::ptrdiff_t>(n));
    const std::map<Identity, mklha::Authenticator> subset(all.begin(), end);
    const auto agg = mklha::eval(pp, subset);
    Bytes wire;
    const Timing t = time_reps(opts.repetitions, [&] { wire = mklha::serialize(agg); });
    rows.push_back(record("aggregate_size", 1, 1, n, opts, t, wire.size()));
  }
  return rows;
}

std::vector<BenchRecord> bench_threads(const std::vector<std::size_t>& thread_counts, const BenchOptions& opts) {
  Rng rng(seed_from_hex(opts.seed));
  const auto pp = mklha::setup(mklha::kSecurityLevel, opts.d, bench_tag(opts));
  const auto kp = mklha::keygen(pp, Identity{1}, rng);
  std::vector<FieldVector> cols;
  for (std::size_t j = 0; j < opts.m; ++j) cols.push_back(random_column(opts.d, rng));
  std::vector<FieldScalar> r(opts.m);
  for (auto& v : r) v = rng.nonzero_field();
  std::vector<BenchRecord> rows;
  for (const std::size_t threads : thread_counts) {
    std::vector<mklha::Authenticator> out(opts.m);
    const Timing t = time_reps(opts.repetitions, [&] {
      parallel_for(opts.m, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
          out[j] = mklha::auth_with_randomness(pp, kp.sk, {pp.session_tag(), 1, j}, cols[j], r[j],
                                               {opts.subcolumns, 1});
        }
      });
    });
    BenchOptions o = opts;
    o.threads = threads;
    rows.push_back(record("auth_threads", opts.d, opts.m, 1, o, t, opts.m * mklha::Authenticator::kSerializedBytes));
  }
  return rows;
}

void write_csv_header(std::ostream& os) {
  os << "operation,d,m,clients,subcolumns,threads,mean_us,stddev_us,bytes,repetitions\n";
}

void write_csv(std::ostream& os, const std::vector<BenchRecord>& rows) {
  for (const auto& r : rows) {
    os << r.operation << ',' << r.d << ',' << r.m << ',' << r.clients << ',' << r.subcolumns << ',' << r.threads
       << ',' << r.mean_us << ',' << r.stddev_us << ',' << r.bytes << ',' << r.repetitions << '\n';
  }
}

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("regression needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace vfl::cli
