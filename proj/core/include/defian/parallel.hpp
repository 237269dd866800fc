// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace defian {

// Worker budget for the convolution kernels. Reads DEFIAN_THREADS once;
// defaults to the hardware concurrency.
int thread_count();

// Runs fn(i) for i in [begin, end). Work is split into contiguous chunks, one
// chunk per worker, so every index is computed by exactly one thread and
// results are bit-identical to the sequential order. `grain` is the minimum
// number of indices that justifies one extra thread.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn,
                  std::int64_t grain = 1);

} // namespace defian
