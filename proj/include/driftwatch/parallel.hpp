#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace driftwatch {

/// Hardware concurrency, at least 1.
inline int default_threads() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls fn(i, workspace) for i in [0, count) on up to `threads` workers. Each
/// worker owns one Workspace. Results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <class Workspace, class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        Workspace ws{};
        for (std::size_t i = 0; i < count; ++i) fn(i, ws);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            Workspace ws{};
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i, ws);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace driftwatch
