#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pheq::detail {

// Worker cap: hardware concurrency (max 8) unless PH_EQ_THREADS overrides.
inline int thread_budget() {
  const unsigned hw = std::thread::hardware_concurrency();
  int cap = hw ? static_cast<int>(hw) : 1;
  cap = std::min(cap, 8);
  if (const char* env = std::getenv("PH_EQ_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      cap = static_cast<int>(std::min<long>(v, 64));
    }
  }
  return std::max(cap, 1);
}

// Invokes fn(lo, hi) on disjoint chunks covering [0, count). fn must be safe
// to run concurrently on disjoint ranges.
template <typename Fn>
void parallel_chunks(int count, Fn&& fn) {
  const int threads = std::min(thread_budget(), std::max(count, 1));
  if (threads <= 1 || count < 2) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pheq::detail
