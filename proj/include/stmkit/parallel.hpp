// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace stmkit {

// Work is split into fixed-size blocks that do not depend on the thread
// count; callers accumulate per-block partials and reduce them in block
// order. That keeps floating-point reductions bit-identical whether the
// pool runs 1 or N workers.
inline constexpr int kDocBlockSize = 64;

inline int num_blocks(int n_items, int block_size = kDocBlockSize) {
    return n_items <= 0 ? 0 : (n_items + block_size - 1) / block_size;
}

// fn(block_index, begin, end) over [0, n_items) in blocks of block_size.
inline void parallel_blocks(int n_items, int threads,
                            const std::function<void(int, int, int)>& fn,
                            int block_size = kDocBlockSize) {
    const int blocks = num_blocks(n_items, block_size);
    if (blocks == 0) {
        return;
    }
    if (threads < 1) {
        threads = 1;
    }
    if (threads == 1 || blocks == 1) {
        for (int b = 0; b < blocks; ++b) {
            const int lo = b * block_size;
            const int hi = std::min(n_items, lo + block_size);
            fn(b, lo, hi);
        }
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= blocks) {
                return;
            }
            try {
                const int lo = b * block_size;
                const int hi = std::min(n_items, lo + block_size);
                fn(b, lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    const int n_workers = std::min(threads, blocks);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace stmkit
