#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace riesz {

/// Worker count: RIESZ_LAB_THREADS when set and positive, else the hardware
/// concurrency, never more than `tasks`.
inline int worker_count(int tasks) {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RIESZ_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = v;
  }
  return std::max(1, std::min(cap, tasks));
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (count <= 0) return;
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace riesz
