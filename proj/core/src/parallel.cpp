#include "ecc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ecc {
namespace {

std::atomic<unsigned> g_threads{0};

constexpr std::size_t kSumBlock = std::size_t{1} << 16;

}  // namespace

void set_thread_count(unsigned threads) { g_threads.store(threads); }

unsigned thread_count() {
  const unsigned configured = g_threads.load();
  if (configured != 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t block_size,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t blocks = (n + block_size - 1) / block_size;
  const std::size_t workers = std::min<std::size_t>(thread_count(), blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      body(b * block_size, std::min(n, (b + 1) * block_size));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        body(b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double stable_sum(std::span<const double> values) {
  const std::size_t blocks = (values.size() + kSumBlock - 1) / kSumBlock;
  if (blocks <= 1) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
  }
  std::vector<CompensatedSum> partial(blocks);
  parallel_for(values.size(), kSumBlock, [&](std::size_t begin, std::size_t end) {
    CompensatedSum acc;
    for (std::size_t i = begin; i < end; ++i) acc.add(values[i]);
    partial[begin / kSumBlock] = acc;
  });
  CompensatedSum total;
  for (const auto& p : partial) total.add(p.value());
  return total.value();
}

}  // namespace ecc
