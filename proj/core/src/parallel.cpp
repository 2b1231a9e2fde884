#include "vfl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace vfl {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("VFL_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace vfl
