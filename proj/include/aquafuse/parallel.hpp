#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aquafuse {

/// Reductions are split into fixed-size blocks so the summation order, and
/// therefore every floating-point result, is independent of thread count.
inline constexpr std::size_t kReduceBlock = 4096;

/// Runs `body(begin, end, partial)` over fixed blocks of [0, n) in parallel and
/// folds the per-block partials left to right with `combine(total, partial)`.
template <class T, class Body, class Combine>
T blocked_reduce(std::size_t n, T identity, Body body, Combine combine) {
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> partials(blocks, identity);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t end = std::min(n, begin + kReduceBlock);
    body(begin, end, partials[static_cast<std::size_t>(b)]);
  }
  T total = identity;
  for (const T& partial : partials) combine(total, partial);
  return total;
}

int max_threads();

/// Pins the OpenMP team size for the lifetime of the object.
class ThreadLimit {
 public:
  explicit ThreadLimit(int threads);
  ~ThreadLimit();
  ThreadLimit(const ThreadLimit&) = delete;
  ThreadLimit& operator=(const ThreadLimit&) = delete;

 private:
  int previous_ = 1;
};

}  // namespace aquafuse
