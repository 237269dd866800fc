// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

// Closed-form eigenvalue filtering vs the per-pixel symmetric 2x2 solver on
// the channel/spatial grid the `bench-eig` subcommand reports. Run with
// --benchmark_filter=... to narrow the grid.

#include <benchmark/benchmark.h>

#include <random>

#include "defian/hessian.hpp"

using namespace defian;

namespace {

struct GradientMaps {
    Tensor<float> hh, vv, hv;
};

GradientMaps make_maps(int channels, int extent) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    GradientMaps maps{Tensor<float>(1, channels, extent, extent),
                      Tensor<float>(1, channels, extent, extent),
                      Tensor<float>(1, channels, extent, extent)};
    for (std::int64_t i = 0; i < maps.hh.size(); ++i) {
        maps.hh[i] = dist(rng);
        maps.vv[i] = dist(rng);
        maps.hv[i] = dist(rng);
    }
    return maps;
}

void closed_form(benchmark::State& state) {
    const GradientMaps maps = make_maps(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
    for (auto _ : state) {
        auto lambda = max_eigenvalue(maps.hh, maps.vv, maps.hv);
        benchmark::DoNotOptimize(lambda.lambda.data());
    }
    state.SetItemsProcessed(state.iterations() * maps.hh.size());
}

void eigen_solver(benchmark::State& state) {
    const GradientMaps maps = make_maps(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
    for (auto _ : state) {
        auto lambda = max_eigenvalue_by_solver(maps.hh, maps.vv, maps.hv);
        benchmark::DoNotOptimize(lambda.data());
    }
    state.SetItemsProcessed(state.iterations() * maps.hh.size());
}

void full_filter(benchmark::State& state) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Tensor<float> x(1, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                    static_cast<int>(state.range(1)));
    for (std::int64_t i = 0; i < x.size(); ++i) x[i] = dist(rng);
    for (auto _ : state) {
        auto lambda = scaled_hessian_filter(x, 3);
        benchmark::DoNotOptimize(lambda.lambda.data());
    }
    state.SetItemsProcessed(state.iterations() * x.size());
}

void grid(benchmark::internal::Benchmark* bench) {
    for (int channels : {1, 4, 16, 64}) {
        for (int extent : {1, 2, 4, 8}) {
            bench->Args({channels, extent});
        }
    }
}

} // namespace

BENCHMARK(closed_form)->Apply(grid);
BENCHMARK(eigen_solver)->Apply(grid);
BENCHMARK(full_filter)->Args({16, 8})->Args({64, 8})->Args({3, 32});

BENCHMARK_MAIN();
