#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cece {

// Every data-parallel kernel accepts this policy. The serial path is the
// reference implementation; tests assert that both paths agree.
enum class Execution { serial, parallel };

namespace detail {

// Fixed block size keeps parallel reductions independent of thread count.
inline constexpr std::size_t kReduceBlock = 1u << 14;

// Reduces [0, n) by accumulating fixed-size blocks into copies of `init`
// and merging the partials in block order.
//   accumulate(begin, end, Acc&)   folds a half-open index range
//   merge(Acc& into, const Acc&)   combines partials
template <class Acc, class Accumulate, class Merge>
Acc blocked_reduce(std::size_t n, const Acc& init, Accumulate&& accumulate, Merge&& merge,
                   Execution exec) {
  if (n <= kReduceBlock) {
    Acc acc = init;
    accumulate(std::size_t{0}, n, acc);
    return acc;
  }
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  // The serial path walks the same blocks, so floating-point partials and
  // their merge order are identical under both policies.
  if (exec == Execution::serial) {
    Acc acc = init;
    for (std::size_t b = 0; b < blocks; ++b) {
      Acc part = init;
      const std::size_t begin = b * kReduceBlock;
      accumulate(begin, begin + kReduceBlock < n ? begin + kReduceBlock : n, part);
      merge(acc, part);
    }
    return acc;
  }
  std::vector<Acc> partial(blocks, init);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t end = begin + kReduceBlock < n ? begin + kReduceBlock : n;
    accumulate(begin, end, partial[static_cast<std::size_t>(b)]);
  }
  Acc acc = init;
  for (const Acc& p : partial) merge(acc, p);
  return acc;
}

// Applies body(i) for i in [0, n).
template <class Body>
void for_each_index(std::size_t n, Body&& body, Execution exec) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace detail
}  // namespace cece
