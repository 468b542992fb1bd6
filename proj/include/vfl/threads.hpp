#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace vfl {

/// Internal parallelism cap: VFL_THREADS env var, default 1 (serial).
inline int thread_budget() {
    static const int budget = [] {
        const char* env = std::getenv("VFL_THREADS");
        if (!env) return 1;
        const int v = std::atoi(env);
        if (v < 1) return 1;
        return v > 64 ? 64 : v;
    }();
    return budget;
}

/// Split [0, n) into contiguous chunks, one per worker. The body must write
/// disjoint data per chunk; arithmetic is unchanged by the split, so results
/// do not depend on the thread count.
template <typename F>
void parallel_chunks(int n, F&& body) {
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int b = n * w / workers;
        const int e = n * (w + 1) / workers;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace vfl
