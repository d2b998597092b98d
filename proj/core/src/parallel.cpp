#include "sojourn/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sojourn {
namespace {

std::atomic<unsigned> g_max_threads{0};

unsigned hardware() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
  const unsigned n = g_max_threads.load();
  return n == 0 ? hardware() : n;
}

void parallel_blocks(std::size_t n_items, std::size_t n_blocks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n_items == 0) return;
  if (n_blocks == 0) n_blocks = 1;
  if (n_blocks > n_items) n_blocks = n_items;

  const auto block_range = [&](std::size_t b) {
    const std::size_t lo = n_items * b / n_blocks;
    const std::size_t hi = n_items * (b + 1) / n_blocks;
    return std::pair{lo, hi};
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(max_threads(), n_blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const auto [lo, hi] = block_range(b);
      fn(b, lo, hi);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        const auto [lo, hi] = block_range(b);
        fn(b, lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sojourn
