#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace reachguard {

inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [begin, end) into contiguous chunks and runs body(lo, hi) on each.
/// The calling thread takes the first chunk.
template <class Body>
void parallel_for(int begin, int end, int jobs, Body&& body) {
  const int total = end - begin;
  if (total <= 0) return;
  const int workers = std::min(resolve_jobs(jobs), total);
  if (workers == 1) {
    body(begin, end);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const int chunk = (total + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(begin, std::min(end, begin + chunk));
}

}  // namespace reachguard
