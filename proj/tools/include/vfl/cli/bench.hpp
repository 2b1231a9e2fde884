#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vfl/mklha.hpp"
#include "vfl/rng.hpp"

namespace vfl::cli {

// One CSV row: mean and standard deviation over `repetitions` timed runs.
struct BenchRecord {
  std::string operation;
  std::size_t d = 0;
  std::size_t m = 1;
  std::size_t clients = 1;
  std::size_t subcolumns = 1;
  std::size_t threads = 1;
  double mean_us = 0.0;
  double stddev_us = 0.0;
  std::size_t bytes = 0;
  std::size_t repetitions = 0;
};

inline constexpr std::size_t kMinRepetitions = 10;

struct BenchOptions {
  std::size_t repetitions = kMinRepetitions;
  std::size_t threads = 1;
  std::size_t subcolumns = 1;
  std::size_t m = 1;
  std::size_t clients = 2;
  std::size_t d = 1024;
  std::string seed = "00";
  // Reused for d sweeps when long enough; hashing 10^6 slot generators
  // dominates otherwise.
  std::shared_ptr<const mklha::PublicParams> params;
};

// Authenticator generation for one column of length d.
std::vector<BenchRecord> bench_auth(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
// Server-side eval over `clients` authenticators (per column, m columns).
std::vector<BenchRecord> bench_eval(const std::vector<std::size_t>& client_counts, const BenchOptions& opts);
// Client-side verification of one aggregated column of length d.
std::vector<BenchRecord> bench_verify(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
// Masking one column of length d against clients - 1 peers.
std::vector<BenchRecord> bench_mask(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
// Unmasking (summing) `clients` masked columns of length d.
std::vector<BenchRecord> bench_unmask(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
// Full honest round at (d, m, clients).
std::vector<BenchRecord> bench_round(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
// Serialized sizes: per-column authenticator vs column length (bytes field),
// plus aggregated size vs client count. Timing fields hold auth time.
std::vector<BenchRecord> bench_size(const std::vector<std::size_t>& d_values, const BenchOptions& opts);
std::vector<BenchRecord> bench_aggregate_size(const std::vector<std::size_t>& client_counts,
                                              const BenchOptions& opts);
// Auth throughput across worker counts at fixed d and m.
std::vector<BenchRecord> bench_threads(const std::vector<std::size_t>& thread_counts, const BenchOptions& opts);

void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const std::vector<BenchRecord>& rows);

// Least-squares fit y = a + b x; returns R^2.
double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vfl::cli
