#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wta {

/// Runs fn(begin, end, worker) over `threads` contiguous chunks of [0, count).
/// The first exception thrown by any worker is rethrown on the caller.
template <typename Fn>
void parallel_chunks(std::int64_t count, int threads, Fn&& fn) {
    const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(count, 1)));
    if (workers == 1) {
        fn(std::int64_t{0}, count, 0);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = count * w / workers;
        const std::int64_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end, w] {
            try {
                fn(begin, end, w);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

/// Runs fn(index) for every index in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    parallel_chunks(count, threads, [&](std::int64_t begin, std::int64_t end, int) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
    });
}

} // namespace wta
