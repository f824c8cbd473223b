#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dyadic {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each index is
/// handled exactly once; callers write results into per-index slots and
/// reduce them afterwards in index order, so the outcome is independent of
/// the thread count.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn)
{
    const std::size_t workers =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace dyadic
