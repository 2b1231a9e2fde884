#include <benchmark/benchmark.h>

#include <map>

#include "vfl/maskagg.hpp"
#include "vfl/mklha.hpp"

using namespace vfl;

namespace {

const Bytes kTag = from_hex("6d6963726f");

const mklha::PublicParams& params() {
  static const auto pp = mklha::setup(mklha::kSecurityLevel, 1 << 16, kTag);
  return pp;
}

FieldVector random_vector(std::size_t d, Rng& rng) {
  FieldVector x(d);
  for (auto& v : x) v = rng.field();
  return x;
}

void BM_Auth(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(seed_from_hex("01"));
  const auto pp = params().prefix(d);
  const auto kp = mklha::keygen(pp, Identity{1}, rng);
  const auto x = random_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mklha::auth(pp, kp.sk, {kTag, 1, 0}, x, rng));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auth)->RangeMultiplier(4)->Range(1 << 8, 1 << 16)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Eval(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(seed_from_hex("02"));
  const auto pp = params().prefix(1);
  std::map<Identity, mklha::Authenticator> sigmas;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto kp = mklha::keygen(pp, Identity{k}, rng);
    sigmas.emplace(kp.id, mklha::auth(pp, kp.sk, {kTag, 1, 0}, random_vector(1, rng), rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(mklha::eval(pp, sigmas));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eval)->Arg(100)->Arg(500)->Arg(1000)->Unit(benchmark::kMicrosecond)->Complexity();

void BM_Verify(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(seed_from_hex("03"));
  const auto pp = params().prefix(d);
  const mklha::Label label{kTag, 1, 0};
  std::map<Identity, mklha::VerificationKey> vks;
  std::map<Identity, mklha::Authenticator> sigmas;
  FieldVector sum(d);
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto kp = mklha::keygen(pp, Identity{k}, rng);
    const auto x = random_vector(d, rng);
    add_assign(sum, x);
    vks.emplace(kp.id, kp.vk);
    sigmas.emplace(kp.id, mklha::auth(pp, kp.sk, label, x, rng));
  }
  const auto agg = mklha::eval(pp, sigmas);
  mklha::VerifyOptions opts;
  opts.rng = &rng;
  for (auto _ : state) {
    if (!mklha::verify(pp, vks, label, sum, agg, opts)) state.SkipWithError("honest aggregate rejected");
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Verify)->RangeMultiplier(4)->Range(1 << 8, 1 << 16)->Unit(benchmark::kMillisecond)->Complexity();

void BM_MaskStream(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  maskagg::PairSeed seed{};
  for (auto _ : state) benchmark::DoNotOptimize(maskagg::derive_mask_stream(seed, 1, 0, d));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(d) * 64);
}
BENCHMARK(BM_MaskStream)->Range(1 << 10, 1 << 16);

}  // namespace
BENCHMARK_MAIN();
