#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qcorr {

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Evaluates f(0..n-1) on up to `jobs` threads. Results are stored by index,
/// so the output order never depends on scheduling. The first exception
/// thrown by any task is rethrown after all workers have joined.
template <typename F>
auto parallel_map(std::size_t n, F&& f, unsigned jobs = default_jobs()) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace qcorr
