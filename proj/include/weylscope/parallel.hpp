#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace weylscope::parallel {

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> value{0};
    return value;
}
} // namespace detail

/// Worker count used when a call passes threads = 0. Zero means hardware concurrency.
inline void set_default_threads(int threads) { detail::thread_setting() = std::max(0, threads); }

inline int default_threads() {
    const int set = detail::thread_setting();
    if (set > 0) return set;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(i) for i in [0, n) over contiguous static chunks.
/// Each index is visited exactly once, so callers writing out[i] get thread-count-independent results.
template <class F>
void for_each_index(std::size_t n, F&& f, int threads = 0) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(threads > 0 ? threads : default_threads()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace weylscope::parallel
