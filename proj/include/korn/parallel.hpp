#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace korn {

/// Global worker count for pair sums and other block-parallel loops.
/// Results never depend on it: work is cut into fixed blocks and reduced
/// in block order.
int num_threads();
void set_num_threads(int n);

/// Runs body(block) for block in [0, nblocks) on num_threads() workers.
template <class Body>
void parallel_blocks(std::size_t nblocks, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, num_threads()));
  if (workers == 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  const auto run = [&] {
    for (std::size_t b = next++; b < nblocks; b = next++) body(b);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, nblocks); ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

/// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace korn
