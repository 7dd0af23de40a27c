#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dlpa::detail {

/// Runs fn(i) for i in [0, total) across `workers` threads. Work items
/// are claimed atomically; callers own any ordering of the results (the
/// usual pattern is writing into a preallocated slot per index, which
/// keeps parallel output identical to serial output). The first thrown
/// exception is rethrown on the calling thread.
inline void parallel_for_index(std::uint64_t total, int workers,
                               const std::function<void(std::uint64_t)>& fn) {
  if (total == 0) return;
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= total || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int n = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), total));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dlpa::detail
