#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace isoreal {

/// Number of workers to use for a request of `workers` (0 means all cores).
inline unsigned resolve_workers(unsigned workers) {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once, so writing results into slot i keeps output
/// independent of the worker count. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    constexpr std::size_t chunk = 16;
    for (;;) {
      const std::size_t start = next.fetch_add(chunk);
      if (start >= n) return;
      const std::size_t stop = std::min(n, start + chunk);
      try {
        for (std::size_t i = start; i < stop; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  for (unsigned k = 1; k < w; ++k) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace isoreal
