#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vfl {

// Splits [0, n) into at most `workers` contiguous chunks and runs
// fn(begin, end) on each, one std::jthread per chunk beyond the first.
// The first exception thrown by any chunk is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&](std::size_t b, std::size_t e) {
    try {
      fn(b, e);
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers;
    std::size_t begin = 0;
    std::size_t first_end = 0;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
      if (w == 0) {
        first_end = end;
      } else {
        pool.emplace_back(run, begin, end);
      }
      begin = end;
    }
    run(0, first_end);
  }
  if (failure) std::rethrow_exception(failure);
}

// Worker count from the VFL_THREADS environment variable, else the hardware
// concurrency, never less than one.
std::size_t default_worker_count();

}  // namespace vfl
