#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace aoi {

/// Worker count: AOI_THREADS if set, otherwise hardware concurrency.
inline int default_thread_count() {
    if (const char* env = std::getenv("AOI_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/**
 * Run fn(i) for i in [0, n) on up to `threads` workers. Work items must be
 * independent; callers that need deterministic aggregation should write
 * results into a pre-sized slot per index and fold them in index order
 * afterwards, which makes the outcome independent of the thread count.
 */
template <typename Fn>
void parallel_for(long long n, int threads, Fn&& fn) {
    if (n <= 0) return;
    const int workers = static_cast<int>(std::min<long long>(threads, n));
    if (workers <= 1) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            while (true) {
                const long long i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

} // namespace aoi
