#pragma once

// Deterministic parallel map: results are stored by index, so the output does
// not depend on scheduling or on the worker count. SIGMALAB_THREADS caps the
// number of workers.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sigmalab {

inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("SIGMALAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, cap);
  }
  return hw;
}

namespace detail {
inline thread_local bool in_worker = false;
}

/// Nested calls from inside a worker run serially.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t count, F&& f) {
  std::vector<R> out(count);
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count));
  if (workers <= 1 || detail::in_worker) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      detail::in_worker = true;
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace sigmalab
