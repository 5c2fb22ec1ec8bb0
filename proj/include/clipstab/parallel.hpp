#pragma once

// Deterministic parallel loops. Work items are indexed; results are stored by
// index and reduced by the caller in index order, so the thread count never
// changes an output. Nested calls made from a worker run serially.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace clipstab {

namespace detail {

inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("CLIPSTAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

inline std::atomic<std::size_t>& thread_setting() {
  static std::atomic<std::size_t> value{default_thread_count()};
  return value;
}

inline thread_local bool inside_worker = false;

}  // namespace detail

inline std::size_t thread_count() { return detail::thread_setting().load(); }

/// 0 restores the default (CLIPSTAB_THREADS or hardware concurrency).
inline void set_thread_count(std::size_t k) {
  detail::thread_setting().store(k == 0 ? detail::default_thread_count() : k);
}

/// Calls body(i) for i in [0, count). The first exception thrown by any item is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(thread_count(), count);
  if (workers <= 1 || detail::inside_worker) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    detail::inside_worker = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
    detail::inside_worker = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace clipstab
