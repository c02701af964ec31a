#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace cfsg {

// Number of worker threads: explicit request wins, then the CFSG_THREADS
// environment variable, then hardware concurrency.
unsigned resolve_threads(int requested);

// Runs body(i) for i in [0, n). Work items must be independent; each one
// should write only to its own output slot. Assignment is a fixed interleave
// (worker w takes i = w, w+T, ...), so any reduction done afterwards in index
// order is reproducible regardless of thread count.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&body, w, n, threads] {
      for (std::size_t i = w; i < n; i += threads) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cfsg
