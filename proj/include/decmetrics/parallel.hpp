#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace decmetrics {

// Runs fn(0..n-1) on up to `workers` threads. If any call throws, remaining
// indices are abandoned and the exception from the lowest failing index is
// rethrown as-is, together with that index via on_failure (when provided).
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn,
                         const std::function<void(std::size_t)>& on_failure = {}) {
    if (n == 0) return;
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    std::size_t failed_index = n;
    std::exception_ptr failure;
    std::mutex mu;
    auto record = [&](std::size_t i, std::exception_ptr e) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
            failed_index = i;
            failure = std::move(e);
        }
    };

    if (threads == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                record(i, std::current_exception());
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> stop{false};
        {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < std::min(threads, n); ++t) {
                pool.emplace_back([&] {
                    for (;;) {
                        if (stop.load()) return;
                        auto i = next.fetch_add(1);
                        if (i >= n) return;
                        try {
                            fn(i);
                        } catch (...) {
                            record(i, std::current_exception());
                            stop.store(true);
                        }
                    }
                });
            }
        }
    }
    if (failure) {
        if (on_failure) on_failure(failed_index);
        std::rethrow_exception(failure);
    }
}

} // namespace decmetrics
