#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

namespace hashnets {

/// Worker cap: HASHNETS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads and returns the
/// results in index order. The first exception thrown by any task is
/// rethrown after all workers join.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(n);
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Pairwise (tree) reduction of `parts` in a fixed order.
template <class T, class Combine>
T tree_reduce(std::vector<T> parts, Combine&& combine) {
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(combine(std::move(parts[i]), std::move(parts[i + 1])));
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

/// Splits [0, count) into fixed-size chunks, evaluates chunk(begin, end) in
/// parallel, and tree-reduces the partials. Chunk boundaries do not depend
/// on the worker count, so the result is bitwise reproducible.
template <class Chunk, class Combine>
auto chunked_reduce(std::size_t count, std::size_t chunk_size, Chunk&& chunk, Combine&& combine) {
  const std::size_t chunks = std::max<std::size_t>(1, (count + chunk_size - 1) / chunk_size);
  auto parts = parallel_map(chunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    return chunk(begin, std::min(count, begin + chunk_size));
  });
  return tree_reduce(std::move(parts), combine);
}

}  // namespace hashnets
