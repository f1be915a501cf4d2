#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

// Parses FRAC_THREADS. Throws ConfigError on a malformed value so the CLI
// can validate it up front.
inline int thread_cap_checked() {
  const char* env = std::getenv("FRAC_THREADS");
  if (env == nullptr || *env == '\0') {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v <= 0) {
    throw ConfigError("FRAC_THREADS must be a positive integer, got '" +
                      std::string(env) + "'");
  }
  return static_cast<int>(std::min<long>(v, 1024));
}

inline int thread_cap() {
  try {
    return thread_cap_checked();
  } catch (const ConfigError&) {
    return 1;
  }
}

// Deterministic parallel loop: [0,n) is split into contiguous chunks, one per
// worker, and each output slot is written by exactly one thread. Results are
// bitwise independent of the thread count for disjoint-write bodies.
template <typename Body>
void parallel_for(std::size_t n, const Body& body) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), n);
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace fraclap
