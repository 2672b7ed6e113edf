#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace ergc::detail {

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency). fn must only write to slots owned by its index.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) fn(i);
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
}

}  // namespace ergc::detail
