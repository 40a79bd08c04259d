#include "lowmach/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lowmach {

namespace {
std::atomic<int> g_threads{1};
}

void set_max_threads(int threads) { g_threads.store(std::max(1, threads)); }

int max_threads() { return g_threads.load(); }

void parallel_for(long count, const std::function<void(long)>& body) {
  if (count <= 0) return;
  const long workers = std::min<long>(max_threads(), count);
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const long chunk = (count + workers - 1) / workers;
  for (long w = 0; w < workers; ++w) {
    const long begin = w * chunk;
    const long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (long i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lowmach
