#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "idpoint/random.hpp"

namespace idpoint {

/// Number of workers used when a caller passes 0: the IDPOINT_THREADS
/// environment variable if set, otherwise the hardware concurrency.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out in fixed-size chunks; callers must write results by index so
/// the outcome does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = default_thread_count();
  const std::size_t chunk = std::max<std::size_t>(1, count / (16 * static_cast<std::size_t>(threads)) );
  if (threads <= 1 || count <= chunk) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      while (true) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, (count + chunk - 1) / chunk));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

/// Evaluates fn(stream) once per replicate with the replicate's own derived
/// stream and returns the results in replicate order.
template <class T, class Fn>
std::vector<T> replicate(std::size_t replicates, Seed seed, unsigned threads, Fn&& fn) {
  std::vector<T> out(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Stream stream(seed.derive(r));
    out[r] = fn(stream);
  });
  return out;
}

}  // namespace idpoint
