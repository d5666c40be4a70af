// Copyright 2026 The qfb Authors
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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qfb {

/// Work is cut into fixed-size blocks whose boundaries never depend on the
/// thread count; partial results are combined in block order afterwards.
inline constexpr std::size_t kParallelBlock = 4096;

/// Number of worker threads to use by default.
inline unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs `body(begin, end)` over [0, n) in fixed blocks on `threads` workers
/// and folds the block results left to right with `combine`.
///
/// The result is independent of `threads` as long as `body` is a pure
/// function of its index range.
template <class Acc, class Body, class Combine>
Acc parallel_reduce(std::size_t n, unsigned threads, Acc init, Body body, Combine combine) {
    const std::size_t blocks = (n + kParallelBlock - 1) / kParallelBlock;
    std::vector<Acc> partial(blocks, init);
    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kParallelBlock;
        const std::size_t end = std::min(n, begin + kParallelBlock);
        partial[b] = body(begin, end);
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
    if (threads == 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            run_block(b);
        }
    } else {
        std::mutex error_mutex;
        std::exception_ptr error;
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < blocks; b += threads) {
                    try {
                        run_block(b);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& worker : pool) {
            worker.join();
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    Acc total = init;
    for (auto& p : partial) {
        total = combine(std::move(total), std::move(p));
    }
    return total;
}

/// Evaluates `fn(i)` for i in [0, n) with one task per index and returns the
/// results in index order. For a few expensive, independent items.
template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& worker : pool) {
        worker.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

}  // namespace qfb
