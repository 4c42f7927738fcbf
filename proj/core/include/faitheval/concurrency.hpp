#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace faitheval {

/// Per-item outcome of a fan-out: either a value or an error message.
template <typename T>
struct Fallible {
    std::optional<T> value;
    std::string error;
    bool ok() const { return value.has_value(); }
};

/// Runs fn(0..n-1) with at most max_parallel worker threads. Results land
/// at their input index, so aggregation order is deterministic regardless
/// of completion order. Exceptions become per-item errors.
template <typename T>
std::vector<Fallible<T>> parallel_map(
    std::size_t n, int max_parallel,
    const std::function<T(std::size_t)>& fn) {
    std::vector<Fallible<T>> results(n);
    if (n == 0) return results;
    const std::size_t workers =
        std::min<std::size_t>(std::max(1, max_parallel), n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                results[i].value = fn(i);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    results[i].value = fn(i);
                } catch (const std::exception& e) {
                    results[i].error = e.what();
                }
            }
        });
    }
    for (auto& thread : threads) thread.join();
    return results;
}

}  // namespace faitheval
