#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mulgraph::parallel {

// MULGRAPH_WORKERS wins over the requested count; 0 means use the hardware.
inline int worker_count(int requested = 0) {
    if (const char* env = std::getenv("MULGRAPH_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(0..trials-1) across workers into a preallocated slot per trial, so
// results never depend on scheduling. fn must derive all randomness from the
// trial index. The first exception is rethrown after the pool drains.
template <typename T, typename Fn>
std::vector<T> run_trials(long trials, Fn&& fn, int workers = 0) {
    std::vector<T> out(static_cast<std::size_t>(trials));
    int nw = worker_count(workers);
    if (nw <= 1 || trials <= 1) {
        for (long i = 0; i < trials; ++i)
            out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) {
        pool.emplace_back([&]() {
            while (!failed.load(std::memory_order_relaxed)) {
                long i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= trials) break;
                try {
                    out[static_cast<std::size_t>(i)] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace mulgraph::parallel
