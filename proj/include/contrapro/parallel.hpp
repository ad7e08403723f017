#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace contrapro {

inline std::size_t default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Splits [0, n) into at most `jobs` contiguous shards and runs
/// fn(worker, begin, end) on each, one thread per shard. Shard boundaries
/// depend only on (n, jobs). The first exception (by worker index) is rethrown.
template <class Fn>
void for_each_shard(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (n == 0) return;
  if (jobs == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    std::size_t begin = n * w / jobs;
    std::size_t end = n * (w + 1) / jobs;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t shard_count(std::size_t n, std::size_t jobs) {
  return n == 0 ? 0 : std::max<std::size_t>(1, std::min(jobs, n));
}

}  // namespace contrapro
