#pragma once

// Static-partition parallel loop. Each index is processed exactly once and
// writes only its own output slot, so results do not depend on the number
// of workers. The first exception thrown by any worker is rethrown.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace recurq {

// 0 means "all hardware threads".
inline std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs != 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Calls body(begin, end) on contiguous blocks of [0, count).
template <class Body>
void parallel_blocks(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::min(resolve_jobs(jobs), count);
  if (jobs <= 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    const std::size_t begin = count * w / jobs;
    const std::size_t end = count * (w + 1) / jobs;
    workers.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  parallel_blocks(count, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace recurq
