#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace contourkit {

/// Runs fn(0..n-1) on `workers` threads. Tasks must be independent; results
/// must be written to per-index slots so the outcome is identical for any
/// worker count. The first exception is rethrown after all threads join.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers < 1) workers = 1;
    if (workers == 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = std::min(workers, n);
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Like parallel_for, but hands each thread a stable worker id so callers can
/// give every worker its own non-shareable resource (e.g. a child process).
inline void parallel_for_workers(int n, int workers,
                                 const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    if (workers < 1) workers = 1;
    if (workers == 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(0, i);
        return;
    }
    workers = std::min(workers, n);
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        threads.emplace_back([&, t] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(t, i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline int default_worker_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace contourkit
