// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace defian {

static int read_thread_env() {
    unsigned hw = std::thread::hardware_concurrency();
    int threads = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("DEFIAN_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) threads = v;
    }
    return std::clamp(threads, 1, 256);
}

int thread_count() {
    static const int count = read_thread_env();
    return count;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn,
                  std::int64_t grain) {
    const std::int64_t range = end - begin;
    if (range <= 0) return;

    std::int64_t workers = std::min<std::int64_t>(thread_count(),
                                                  std::max<std::int64_t>(1, range / std::max<std::int64_t>(1, grain)));
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }

    const std::int64_t chunk = (range + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t t = 0; t < workers; ++t) {
        const std::int64_t lo = begin + t * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace defian
