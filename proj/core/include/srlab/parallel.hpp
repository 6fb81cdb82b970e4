#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace srlab {

/// Static partition parallel_for. The work split depends only on (count,
/// threads), never on timing, so reductions over the results are
/// reproducible.
template <typename F>
void parallel_for(std::size_t count, int threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([t, nthreads, count, &body] {
      for (std::size_t i = t; i < count; i += nthreads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace srlab
