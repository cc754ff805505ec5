#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace loopsoup {

// Worker count resolution: explicit request > LOOPSOUP_WORKERS > hardware.
inline int worker_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LOOPSOUP_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs f(i) for i in [0, n) on `workers` threads. Callers write results into
// per-index slots, so the outcome is independent of the worker count.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  if (n == 0) return;
  const int w = std::min<std::size_t>(std::max(workers, 1), n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&, t]() {
      for (std::size_t i = static_cast<std::size_t>(t); i < n;
           i += static_cast<std::size_t>(w))
        f(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace loopsoup
