#include "goursat2d/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace goursat2d {
namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("GOURSAT2D_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::atomic<std::size_t> override_threads{0};

// Below this many items the thread start-up cost dominates.
constexpr std::size_t kMinItemsPerThread = 8;

}  // namespace

std::size_t max_threads() {
  static const std::size_t from_env = default_threads();
  const std::size_t forced = override_threads.load();
  return forced > 0 ? forced : from_env;
}

void set_max_threads(std::size_t count) { override_threads.store(count); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min(max_threads(), std::max<std::size_t>(1, count / kMinItemsPerThread));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  // The failure with the lowest index wins so diagnostics do not depend on timing.
  std::exception_ptr failure;
  std::size_t failure_index = count;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      std::size_t k = begin;
      try {
        for (; k < end; ++k) body(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (k < failure_index) {
          failure_index = k;
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace goursat2d
