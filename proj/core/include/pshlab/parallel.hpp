#pragma once

#include <cstddef>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace pshlab {

// Worker count: PSHLAB_THREADS when set, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("PSHLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Static chunking over [0, n); fn(begin, end) runs on worker threads.
// Callers write results by index, so output order is deterministic
// regardless of scheduling.
template <class F>
void parallel_chunks(std::size_t n, F&& fn) {
  int workers = thread_count();
  if (n == 0) return;
  if (workers <= 1 || n < 64) {
    fn(std::size_t{0}, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int t = 0; t < workers; ++t) {
    std::size_t begin = t * chunk;
    if (begin >= n) break;
    std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pshlab
