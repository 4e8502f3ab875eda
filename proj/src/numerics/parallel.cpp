#include "fbsde/numerics/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fbsde {
namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("FBSDE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t>& workers() {
  static std::atomic<std::size_t> n{default_threads()};
  return n;
}

}  // namespace

std::size_t thread_count() { return workers().load(); }

void set_thread_count(std::size_t n) { workers().store(n == 0 ? default_threads() : n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::size_t nt = std::min(thread_count(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (std::size_t k = 1; k < nt; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fbsde
