#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace syk {

// Runs fn(i) for every i in [0, n_tasks) on up to n_workers threads.
// Tasks must be independent; callers own result placement (preallocated
// slots indexed by i), so the outcome never depends on the worker count.
inline void run_indexed_tasks(std::size_t n_tasks, int n_workers,
                              const std::function<void(std::size_t)>& fn) {
    n_workers = std::clamp<int>(n_workers, 1, int(std::max<std::size_t>(n_tasks, 1)));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n_tasks) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace syk
