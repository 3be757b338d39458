#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace reviewlab {

inline int resolve_threads(int n_threads) {
  if (n_threads > 0) return n_threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(begin, end) over disjoint chunks of [0, n). Results written by
/// index stay schedule-independent.
template <typename Fn>
void parallel_for(std::size_t n, int n_threads, Fn&& fn) {
  const int workers = resolve_threads(n_threads);
  if (n == 0) return;
  if (workers <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace reviewlab
