#include "obcsaa/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace obcsaa {

namespace {

std::atomic<int> g_thread_count{0};  // 0 = hardware

int effective_threads() {
  int n = g_thread_count.load(std::memory_order_relaxed);
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_thread_count(int n) {
  g_thread_count.store(n < 0 ? 0 : n, std::memory_order_relaxed);
}

int thread_count() { return effective_threads(); }

void parallel_blocks(
    std::size_t count, std::size_t block_size,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (count + block_size - 1) / block_size;

  auto run_block = [&](std::size_t b) {
    std::size_t begin = b * block_size;
    std::size_t end = std::min(begin + block_size, count);
    fn(b, begin, end);
  };

  int workers = effective_threads();
  if (workers <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }

  workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), n_blocks));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      run_block(b);
    }
  };
  std::vector<std::thread> helpers;
  helpers.reserve(static_cast<std::size_t>(workers) - 1);
  for (int i = 1; i < workers; ++i) helpers.emplace_back(drain);
  drain();
  for (auto& t : helpers) t.join();
}

}  // namespace obcsaa
