#include "rieszflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace rieszflow {
namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  g_threads.store(threads);
}

int thread_count() { return g_threads.load(); }

void parallel_for(int tasks, const std::function<void(int)>& body) {
  const int workers = std::min(thread_count(), tasks);
  if (workers <= 1) {
    for (int t = 0; t < tasks; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) body(t);
    });
  }
}

}  // namespace rieszflow
