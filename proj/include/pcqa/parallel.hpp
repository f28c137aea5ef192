#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace pcqa {

/// Runs fn(begin, end) over a contiguous partition of [0, n) on at most
/// n_threads threads; n_threads <= 1 runs inline. Workers must touch
/// disjoint state. The first worker exception is rethrown after the join.
template <typename Fn>
void parallel_chunks(std::size_t n, int n_threads, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers =
      n_threads <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, &errors, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pcqa
