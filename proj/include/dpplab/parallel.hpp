#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dpplab {

inline constexpr const char* kWorkersEnv = "DPP_LAB_WORKERS";

namespace detail {
inline std::atomic<std::size_t>& worker_override() {
  static std::atomic<std::size_t> v{0};
  return v;
}
}  // namespace detail

// Worker count: explicit override, then $DPP_LAB_WORKERS, then hardware concurrency.
inline std::size_t worker_count() {
  if (auto w = detail::worker_override().load(); w > 0) return w;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

inline void set_worker_count(std::size_t n) { detail::worker_override().store(n); }

// Static block partition of [0, n). fn(begin, end) must only write to slots it owns,
// which keeps results independent of the worker count.
template <class F>
void parallel_blocks(std::size_t n, F&& fn, std::size_t workers = worker_count()) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1 || n < 2) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t b = n * t / workers, e = n * (t + 1) / workers;
    pool.emplace_back([&, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

template <class F>
void parallel_for(std::size_t n, F&& fn, std::size_t workers = worker_count()) {
  parallel_blocks(
      n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
      },
      workers);
}

}  // namespace dpplab
