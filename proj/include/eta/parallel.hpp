// Copyright 2026 The eta-decompose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Two reduction schemes over items 0..n-1:
//
//  ordered_map_fold   map() runs on any worker, fold() runs on the calling
//                     thread in the given order. The result is bit-identical
//                     for every worker count. At most `window` mapped results
//                     are buffered.
//  parallel_reduce    each worker folds into a private accumulator; partials
//                     are merged in worker order. Faster, but the result
//                     depends on the work split through reassociation.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace eta {

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

template <class T, class Map, class Fold>
void ordered_map_fold(std::span<const std::size_t> order, std::size_t workers, Map&& map,
                      Fold&& fold) {
  const std::size_t n = order.size();
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t pos = 0; pos < n; ++pos) fold(map(order[pos]));
    return;
  }

  const std::size_t window = 4 * workers;
  std::vector<std::optional<T>> slots(window);
  std::mutex mu;
  std::condition_variable cv;
  std::size_t next_claim = 0;
  std::size_t folded = 0;
  bool abort = false;
  std::exception_ptr error;

  auto worker = [&] {
    while (true) {
      std::size_t pos;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return abort || next_claim >= n || next_claim < folded + window; });
        if (abort || next_claim >= n) return;
        pos = next_claim++;
      }
      std::optional<T> result;
      try {
        result.emplace(map(order[pos]));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        abort = true;
        cv.notify_all();
        return;
      }
      std::lock_guard lock(mu);
      slots[pos % window] = std::move(result);
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);

  try {
    while (true) {
      std::optional<T> item;
      {
        std::unique_lock lock(mu);
        if (folded >= n) break;
        cv.wait(lock, [&] { return abort || slots[folded % window].has_value(); });
        if (abort) break;
        item = std::move(slots[folded % window]);
        slots[folded % window].reset();
      }
      fold(std::move(*item));
      {
        std::lock_guard lock(mu);
        ++folded;
      }
      cv.notify_all();
    }
  } catch (...) {
    std::lock_guard lock(mu);
    if (!error) error = std::current_exception();
    abort = true;
    cv.notify_all();
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class Acc, class Init, class Body, class Merge>
Acc parallel_reduce(std::size_t n, std::size_t workers, Init&& init, Body&& body, Merge&& merge) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<Acc> partial;
  partial.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) partial.push_back(init());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto run = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < n && !abort; i = next++) body(partial[w], i);
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
      abort = true;
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  Acc total = std::move(partial[0]);
  for (std::size_t w = 1; w < workers; ++w) merge(total, partial[w]);
  return total;
}

}  // namespace eta
