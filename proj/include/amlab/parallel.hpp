#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace amlab {

/// Process-wide worker count used by parallel_map. Results never depend on
/// it: tasks are indexed, seeded by index, and reduced in index order.
void set_workers(int n);
int workers();

namespace detail {
/// set inside pool threads so nested maps run inline
inline thread_local bool in_pool = false;
}

/// Seed for task i derived from a base seed (splitmix64 finalizer).
std::uint64_t task_seed(std::uint64_t base, std::uint64_t i);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  const int w = detail::in_pool ? 1 : std::min<int>(workers(), int(n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      detail::in_pool = true;
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  // rethrow the lowest-index failure so the reported error is schedule-free
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace amlab
