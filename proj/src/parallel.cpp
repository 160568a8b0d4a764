#include "dsii/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dsii {

int resolve_threads(int requested) {
  long n = requested;
  if (n < 0) {
    const char* env = std::getenv("DSII_THREADS");
    n = env ? std::strtol(env, nullptr, 10) : 0;
  }
  if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (n > 64) n = 64;
  return static_cast<int>(n);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::size_t n = static_cast<std::size_t>(threads < 1 ? 1 : threads);
  if (n > count) n = count;
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dsii
