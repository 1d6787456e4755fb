#ifndef RVAS_PARALLEL_HPP
#define RVAS_PARALLEL_HPP

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rvas {

// Static block partition of [0, n) over `threads` workers. Work items must
// be independent; determinism comes from each item owning its substream and
// writing to its own slot.
inline void parallel_for(long n, int threads, const std::function<void(long)>& body) {
  if (n <= 0) return;
  if (threads < 1) threads = 1;
  const long workers = std::min<long>(threads, n);
  if (workers == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error = nullptr;
  std::mutex err_mutex;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    const long lo = n * w / workers;
    const long hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rvas

#endif  // RVAS_PARALLEL_HPP
