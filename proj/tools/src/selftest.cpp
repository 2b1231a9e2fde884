#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "vfl/adversary.hpp"
#include "vfl/cli/commands.hpp"
#include "vfl/codec.hpp"
#include "vfl/errors.hpp"
#include "vfl/group.hpp"
#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"
#include "vfl/round.hpp"

namespace vfl::cli {

namespace {

bool check_codec(Rng& rng) {
  for (int dp : {2, 4, 6, 8}) {
    const Codec codec(Precision(dp), EncodingBounds{1.0, 8});
    const double tol = 0.5 * std::pow(10.0, -dp);
    for (int k = 0; k < 2000; ++k) {
      const double x = 2.0 * rng.next_unit() - 1.0;
      if (std::abs(codec.decode(codec.encode(x)) - x) > tol * (1 + 1e-9)) return false;
    }
    // additive homomorphism against fixed-point integers
    for (int k = 0; k < 200; ++k) {
      FieldScalar acc = FieldScalar::zero();
      int128 expect = 0;
      for (int c = 0; c < 8; ++c) {
        const double x = 2.0 * rng.next_unit() - 1.0;
        acc += codec.encode(x);
        expect += codec.to_fixed(x);
      }
      if (codec.lift(acc) != expect) return false;
    }
  }
  return true;
}

bool check_cancellation(Rng& rng) {
  for (std::size_t n : {1u, 2u, 3u, 8u}) {
    std::vector<Identity> ids;
    for (std::size_t k = 1; k <= n; ++k) ids.push_back(Identity{k});
    const auto secrets = maskagg::provision(ids, rng);
    const std::size_t d = 64;
    FieldVector plain_sum(d);
    std::vector<FieldVector> masked;
    for (const auto id : ids) {
      FieldVector x(d);
      for (auto& v : x) v = rng.field();
      add_assign(plain_sum, x);
      masked.push_back(maskagg::mask(x, id, secrets.view_for(id), ids, 3, 1));
    }
    std::vector<std::span<const FieldScalar>> views(masked.begin(), masked.end());
    if (maskagg::unmask_sum(views, n) != plain_sum) return false;
  }
  return true;
}

protocol::SessionConfig small_session(std::size_t n, std::size_t d, std::size_t m, std::size_t workers) {
  protocol::SessionConfig cfg;
  cfg.d = d;
  cfg.m = m;
  cfg.bounds = {1.0, static_cast<std::uint32_t>(n)};
  for (std::size_t k = 1; k <= n; ++k) cfg.active.push_back(Identity{k});
  cfg.session_tag = from_hex("73656c6674657374");
  cfg.subcolumns = 2;
  cfg.workers = workers;
  return cfg;
}

bool check_correctness(Rng& rng, std::size_t workers) {
  auto world = protocol::make_world(small_session(4, 12, 3, workers), rng);
  const Codec codec = world.cfg.codec();
  for (std::uint64_t round = 1; round <= 3; ++round) {
    const auto plain = protocol::synthetic_updates(world.cfg, rng);
    const auto tr = protocol::run_round(world, round, plain);
    if (!tr.accepted()) return false;
    const uint128 den = static_cast<uint128>(plain.size()) * codec.precision().scale();
    for (const auto& [id, verdict] : tr.verdicts) {
      if (!verdict.model) return false;
      for (std::size_t j = 0; j < world.cfg.m; ++j) {
        for (std::size_t i = 0; i < world.cfg.d; ++i) {
          int128 sum = 0;
          for (const auto& [cid, mat] : plain) sum += codec.to_fixed(mat(i, j));
          if ((*verdict.model)(i, j) != ratio_to_double(sum, den)) return false;
        }
      }
    }
  }
  return true;
}

bool check_detection(Rng& rng, std::size_t workers) {
  adversary::SuiteOptions opts;
  opts.trials = 3;
  opts.max_clients = 3;
  opts.max_d = 6;
  opts.max_m = 3;
  opts.workers = workers;
  const auto report = adversary::detection_suite(opts, rng);
  return report.all_detected() && report.false_rejects == 0;
}

// An authenticator whose commitment lies on the curve but outside the
// prime-order subgroup must not deserialize.
bool check_subgroup(Rng& rng) {
  const auto pp = mklha::setup(mklha::kSecurityLevel, 2, from_hex("7367"));
  const auto kp = mklha::keygen(pp, Identity{1}, rng);
  const auto sigma = mklha::auth(pp, kp.sk, {pp.session_tag(), 1, 0}, FieldVector{FieldScalar::one(), FieldScalar::zero()}, rng);
  Bytes wire = mklha::serialize(sigma);
  const auto bad = testing::off_subgroup_g1_point();
  std::copy(bad.begin(), bad.end(), wire.begin() + G1::kCompressedBytes);
  try {
    (void)mklha::deserialize_authenticator(wire);
  } catch (const DeserializationError&) {
    try {
      (void)G1::decompress(ByteView(bad.data(), bad.size()));
    } catch (const DeserializationError&) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool cmd_selftest(const SelftestOptions& opts, std::ostream& log) {
  const bool previous = testing::subgroup_checks_enabled();
  testing::set_subgroup_checks(!opts.disable_subgroup_checks);
  Rng rng(seed_from_hex("5e1f7e57"));
  const std::size_t workers = std::max<std::size_t>(1, opts.threads);

  const std::pair<const char*, std::function<bool()>> checks[] = {
      {"codec", [&] { return check_codec(rng); }},
      {"mask-cancellation", [&] { return check_cancellation(rng); }},
      {"honest-rounds", [&] { return check_correctness(rng, workers); }},
      {"tamper-detection", [&] { return check_detection(rng, workers); }},
      {"subgroup-check", [&] { return check_subgroup(rng); }},
  };
  bool all = true;
  for (const auto& [name, fn] : checks) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    log << (ok ? "PASS " : "FAIL ") << name << " [" << ms << " ms]" << note << '\n';
    all = all && ok;
  }
  testing::set_subgroup_checks(previous);
  return all;
}

}  // namespace vfl::cli
