#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace p2m {

/// Worker count from P2M_THREADS, falling back to the hardware count.
inline unsigned defaultThreadCount() {
  if (const char* env = std::getenv("P2M_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return unsigned(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(worker, begin, end) over `threads` contiguous chunks of [0, count).
/// Chunk boundaries depend only on count and threads. The first exception
/// thrown by a worker is rethrown on the calling thread.
template <typename Fn>
void parallelChunks(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    fn(0u, std::size_t(0), count);
    return;
  }
  threads = unsigned(std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex errorMutex;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = count * w / threads;
    const std::size_t end = count * (w + 1) / threads;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        std::lock_guard lock(errorMutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace p2m
