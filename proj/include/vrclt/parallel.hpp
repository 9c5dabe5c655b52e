#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vrclt {

// Runs body(0..count-1) on a worker pool. workers = 0 picks the hardware
// count. Each index must write only to its own output slot; with that
// discipline results are identical for every worker count, since work
// assignment never feeds back into the values computed. The first exception
// thrown by any index is rethrown after all workers drain.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  int n_workers = workers;
  if (n_workers <= 0) {
    n_workers = static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
  }
  if (n_workers > count) n_workers = static_cast<int>(count);

  if (n_workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto drain = [&]() {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vrclt
