#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace ecc {

/// Process-wide worker count used by every parallel kernel. 0 restores the
/// default (hardware concurrency).
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(begin, end) over [0, n) split into fixed-size blocks. Block
/// boundaries depend only on n and block_size, never on the thread count, so
/// any kernel that writes disjoint outputs per block is bit-stable across
/// thread counts.
void parallel_for(std::size_t n, std::size_t block_size,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Compensated sum over fixed blocks of 65536 elements combined in block
/// order; the result is independent of the thread count.
double stable_sum(std::span<const double> values);

}  // namespace ecc
