// Copyright 2026 The audiodiv Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixed-schedule parallel loops.
//
// Work is cut into blocks whose boundaries depend only on the problem size,
// never on the thread count. Reductions combine per-block partials in block
// order, so every result is bit-identical for any number of threads.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace audiodiv {

namespace detail {

inline std::atomic<int>& thread_setting() {
  static std::atomic<int> value{0};
  return value;
}

}  // namespace detail

/// Caps worker parallelism. Zero restores the default (AUDIODIV_THREADS,
/// else hardware concurrency).
inline void set_num_threads(int n) { detail::thread_setting() = std::max(0, n); }

inline int num_threads() {
  int n = detail::thread_setting();
  if (n > 0) return n;
  if (const char* env = std::getenv("AUDIODIV_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(block_begin, block_end, block_index) for every block of
/// `block_size` consecutive indices in [0, n).
template <typename Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, Fn&& fn) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t num_blocks = (n + block_size - 1) / block_size;
  const auto workers =
      static_cast<std::size_t>(std::min<std::size_t>(num_threads(), num_blocks));
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    fn(begin, std::min(n, begin + block_size), b);
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < num_blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= num_blocks) return;
      try {
        run_block(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = num_blocks;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Per-index loop over [0, n) with a fixed block schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t block_size = 64) {
  parallel_blocks(n, block_size, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

/// Deterministic sum: each block produces a partial, partials are added in
/// block order.
template <typename T, typename BlockFn>
T parallel_sum(std::size_t n, std::size_t block_size, BlockFn&& block_fn) {
  if (n == 0) return T{};
  block_size = std::max<std::size_t>(1, block_size);
  std::vector<T> partials((n + block_size - 1) / block_size, T{});
  parallel_blocks(n, block_size, [&](std::size_t begin, std::size_t end, std::size_t b) {
    partials[b] = block_fn(begin, end);
  });
  T total{};
  for (const T& p : partials) total += p;
  return total;
}

}  // namespace audiodiv
