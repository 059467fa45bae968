#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace boltz {

/// Worker count: explicit setting, else BOLTZ_WORKERS, else 1.
inline int& worker_setting() {
  static int workers = 0;
  return workers;
}

inline void set_workers(int n) { worker_setting() = std::max(0, n); }

inline int workers() {
  if (worker_setting() > 0) return worker_setting();
  if (const char* env = std::getenv("BOLTZ_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs body(begin, end) over `chunks` contiguous slices of [0, n).
/// Slices are fixed by `chunks` alone, so per-slice partial results can be
/// combined in a worker-independent order.
template <typename Body>
void parallel_chunks(std::size_t n, std::size_t chunks, Body&& body) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  auto slice = [&](std::size_t c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    body(c, lo, hi);
  };
  const auto nw = static_cast<std::size_t>(workers());
  if (nw <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) slice(c);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(nw, chunks); ++t)
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += nw) slice(c);
    });
  for (auto& th : pool) th.join();
}

/// Elementwise parallel loop body(i).
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto nw = static_cast<std::size_t>(workers());
  parallel_chunks(n, nw, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace boltz
