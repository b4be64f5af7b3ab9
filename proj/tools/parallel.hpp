#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace xpi::cli {

/// Worker cap: --threads flag when positive, else XPI_THREADS, else hardware.
inline int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("XPI_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n) on a bounded pool; results land at their index,
/// so output order is deterministic regardless of scheduling.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(int n, int threads, Fn fn) {
    std::vector<Result> results(static_cast<std::size_t>(n));
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int workers = std::min(threads, n);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                results[static_cast<std::size_t>(i)] = fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
    return results;
}

}  // namespace xpi::cli
