#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lbtcoex {

// Worker cap: LBT_COEX_THREADS if set (>=1), else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("LBT_COEX_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

// Runs fn(i) for i in [0, n) across workers. fn must write only to
// index-owned slots so results are deterministic regardless of scheduling.
template <typename Fn>
inline void parallel_for(long long n, Fn&& fn, int max_workers = -1) {
  int workers = max_workers > 0 ? max_workers : worker_count();
  if (workers <= 1 || n <= 1) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long long> next{0};
  std::vector<std::thread> pool;
  int spawn = int(std::min<long long>(workers, n));
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t)
    pool.emplace_back([&] {
      for (long long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace lbtcoex
