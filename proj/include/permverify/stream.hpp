// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace permverify {

/// Calls `fn(worker, item)` for every item in [0, items), spreading items
/// over `threads` workers that each pull the next unclaimed index. The first
/// exception thrown by any worker is rethrown after all workers stop.
template <typename Fn>
void parallel_for_items(std::uint64_t items, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || items <= 1) {
        for (std::uint64_t i = 0; i < items; ++i) fn(std::size_t{0}, i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = next++; i < items; i = next++) fn(w, i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = items;
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace permverify
