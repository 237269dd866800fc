// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "defian/eigen_bench.hpp"
#include "defian/hessian.hpp"
#include "testutil.hpp"

using namespace defian;
using namespace defian::test;

namespace {

// Independent stencil application: per-pixel loop with zero padding.
template <typename T>
Tensor<T> naive_stencil(const Tensor<T>& x, const std::vector<float>& stencil, int ker) {
    const int pad = ker / 2;
    Tensor<T> out(x.shape());
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            for (int y = 0; y < x.h(); ++y) {
                for (int xc = 0; xc < x.w(); ++xc) {
                    double acc = 0;
                    for (int ky = 0; ky < ker; ++ky) {
                        for (int kx = 0; kx < ker; ++kx) {
                            const int iy = y + ky - pad;
                            const int ix = xc + kx - pad;
                            if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
                            acc += static_cast<double>(
                                       stencil[static_cast<std::size_t>(ky) * ker + kx]) *
                                   x.at(n, c, iy, ix);
                        }
                    }
                    out.at(n, c, y, xc) = static_cast<T>(acc);
                }
            }
        }
    }
    return out;
}

std::set<std::pair<int, int>> nonzero_support(const Tensor<float>& map, float tol = 0.0f) {
    std::set<std::pair<int, int>> support;
    for (int y = 0; y < map.h(); ++y) {
        for (int x = 0; x < map.w(); ++x) {
            if (std::abs(map.at(0, 0, y, x)) > tol) support.insert({y, x});
        }
    }
    return support;
}

} // namespace

TEST_CASE("kernel sets match the stated stencils") {
    const auto k3 = HessianKernelSet::make(3);
    const std::vector<float> hh3 = {0, 0, 0, 1, -2, 1, 0, 0, 0};
    const std::vector<float> vv3 = {0, 1, 0, 0, -2, 0, 0, 1, 0};
    const std::vector<float> hv3 = {1, 0, -1, 0, 0, 0, -1, 0, 1};
    CHECK(k3.g_hh == hh3);
    CHECK(k3.g_vv == vv3);
    CHECK(k3.g_hv == hv3);

    const auto k5 = HessianKernelSet::make(5);
    // hh: centre row [1, 0, -2, 0, 1].
    for (int col = 0; col < 5; ++col) {
        const float expect = (col == 0 || col == 4) ? 1.0f : (col == 2 ? -2.0f : 0.0f);
        CHECK(k5.g_hh[2 * 5 + col] == expect);
        CHECK(k5.g_vv[col * 5 + 2] == expect);  // transpose
    }
    // hv: outer product of [1, 0, 0, 0, -1] with itself.
    CHECK(k5.g_hv[0] == 1.0f);
    CHECK(k5.g_hv[4] == -1.0f);
    CHECK(k5.g_hv[20] == -1.0f);
    CHECK(k5.g_hv[24] == 1.0f);

    const auto k7 = HessianKernelSet::make(7);
    const std::vector<float> row7 = {1, 0, 0, -2, 0, 0, 1};
    for (int col = 0; col < 7; ++col) CHECK(k7.g_hh[3 * 7 + col] == row7[static_cast<std::size_t>(col)]);
    CHECK(k7.g_hv[0] == 1.0f);
    CHECK(k7.g_hv[6] == -1.0f);
    CHECK(k7.g_hv[42] == -1.0f);
    CHECK(k7.g_hv[48] == 1.0f);

    for (int ker : {3, 5, 7}) {
        const auto ks = HessianKernelSet::make(ker);
        for (const auto* stencil : {&ks.g_hh, &ks.g_vv, &ks.g_hv}) {
            float sum = 0;
            for (float v : *stencil) sum += v;
            CHECK(sum == 0.0f);
        }
    }

    CHECK_THROWS_AS(HessianKernelSet::make(9), std::invalid_argument);
    CHECK_THROWS_AS(HessianKernelSet::make(4), std::invalid_argument);
}

TEST_CASE("hessian_gradients: constants, quadratic ramps, loop oracle") {
    // Constant image: the stencils sum to zero, so every pixel whose taps all
    // land inside the plane filters to zero. The zero-padded border ring sees
    // truncated stencils; the cancellation there happens in the eigenvalue
    // map, which is checked below for every scale.
    Tensor<float> flat = Tensor<float>::full({1, 2, 6, 6}, 3.25f);
    Tensor<float> ghh, gvv, ghv;
    hessian_gradients(flat, HessianKernelSet::make(3), ghh, gvv, ghv);
    for (int n = 0; n < 1; ++n) {
        for (int c = 0; c < 2; ++c) {
            for (int y = 1; y < 5; ++y) {
                for (int x = 1; x < 5; ++x) {
                    CHECK(ghh.at(n, c, y, x) == 0.0f);
                    CHECK(gvv.at(n, c, y, x) == 0.0f);
                    CHECK(ghv.at(n, c, y, x) == 0.0f);
                }
            }
        }
    }

    // x(h, v) = h^2 along the horizontal axis: exact second difference.
    Tensor<float> quad(1, 1, 7, 9);
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 9; ++x) quad.at(0, 0, y, x) = static_cast<float>(x * x);
    }
    hessian_gradients(quad, HessianKernelSet::make(3), ghh, gvv, ghv);
    for (int y = 1; y < 6; ++y) {
        for (int x = 1; x < 8; ++x) {
            CHECK(ghh.at(0, 0, y, x) == doctest::Approx(2.0f));
            CHECK(gvv.at(0, 0, y, x) == doctest::Approx(0.0f));
            CHECK(ghv.at(0, 0, y, x) == doctest::Approx(0.0f));
        }
    }

    // Random 8x8, ker = 5, against the naive per-pixel loop.
    std::mt19937 rng(51);
    Tensor<float> img(1, 2, 8, 8);
    fill_uniform(img, rng);
    const auto ks = HessianKernelSet::make(5);
    hessian_gradients(img, ks, ghh, gvv, ghv);
    CHECK(max_abs_diff(ghh, naive_stencil(img, ks.g_hh, 5)) <= 1e-6);
    CHECK(max_abs_diff(gvv, naive_stencil(img, ks.g_vv, 5)) <= 1e-6);
    CHECK(max_abs_diff(ghv, naive_stencil(img, ks.g_hv, 5)) <= 1e-6);

    Tensor<float> tiny(1, 1, 4, 4);
    CHECK_THROWS_AS(hessian_gradients(tiny, HessianKernelSet::make(5), ghh, gvv, ghv),
                    std::invalid_argument);
}

TEST_CASE("max_eigenvalue: pinned matrices and the solver oracle") {
    Tensor<float> a({1, 1, 1, 2}, {1.0f, 0.0f});
    Tensor<float> d({1, 1, 1, 2}, {3.0f, 0.0f});
    Tensor<float> b({1, 1, 1, 2}, {0.0f, 1.0f});
    const auto map = max_eigenvalue(a, d, b);
    CHECK(map.lambda[0] == doctest::Approx(3.0f));  // diag(1, 3)
    CHECK(map.lambda[1] == doctest::Approx(1.0f));  // antidiagonal, eigenvalues +-1

    std::mt19937 rng(53);
    Tensor<float> ghh(1, 1, 25, 40), gvv(1, 1, 25, 40), ghv(1, 1, 25, 40);
    fill_uniform(ghh, rng, -4.0f, 4.0f);
    fill_uniform(gvv, rng, -4.0f, 4.0f);
    fill_uniform(ghv, rng, -4.0f, 4.0f);
    const auto closed = max_eigenvalue(ghh, gvv, ghv);
    const auto solved = max_eigenvalue_by_solver(ghh, gvv, ghv);
    CHECK(max_abs_diff(closed.lambda, solved) <= 1e-5);

    // lambda never falls below the eigenvalue mean (half the trace).
    for (std::int64_t i = 0; i < ghh.size(); ++i) {
        CHECK(closed.lambda[i] >= (ghh[i] + gvv[i]) / 2.0f - 1e-6f);
    }
}

TEST_CASE("max eigenvalue of -H is minus the minimum eigenvalue of H") {
    std::mt19937 rng(59);
    Tensor<float> x(1, 1, 12, 12);
    fill_uniform(x, rng);
    Tensor<float> neg(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) neg[i] = -x[i];

    Tensor<float> ghh, gvv, ghv, nhh, nvv, nhv;
    const auto ks = HessianKernelSet::make(3);
    hessian_gradients(x, ks, ghh, gvv, ghv);
    hessian_gradients(neg, ks, nhh, nvv, nhv);
    const auto lam_neg = max_eigenvalue(nhh, nvv, nhv);
    for (std::int64_t i = 0; i < x.size(); ++i) {
        const double lambda2 = symmetric2x2_min_eigenvalue(ghh[i], gvv[i], ghv[i]);
        CHECK(std::abs(lam_neg.lambda[i] + lambda2) <= 1e-5);
    }
}

TEST_CASE("scaled_hessian_filter: constants, quadratic under the gapped stencil") {
    for (int ker : {3, 5, 7}) {
        const auto map = scaled_hessian_filter(Tensor<float>::full({1, 1, 9, 9}, 0.7f), ker);
        for (std::int64_t i = 0; i < map.lambda.size(); ++i) CHECK(map.lambda[i] == 0.0f);
    }
    CHECK_THROWS_AS(scaled_hessian_filter(Tensor<float>(1, 1, 9, 9), 9),
                    std::invalid_argument);

    // ker=5 on x = h^2: interior g_hh = (h-2)^2 - 2h^2 + (h+2)^2 = 8, so lambda = 8.
    Tensor<float> quad(1, 1, 9, 12);
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 12; ++x) quad.at(0, 0, y, x) = static_cast<float>(x * x);
    }
    const auto map5 = scaled_hessian_filter(quad, 5);
    for (int y = 2; y < 7; ++y) {
        for (int x = 2; x < 10; ++x) CHECK(map5.lambda.at(0, 0, y, x) == doctest::Approx(8.0f));
    }
}

TEST_CASE("impulse and step responses: coarser scales react over wider extents") {
    // Impulse: the ker=7 response reaches Chebyshev radius 3, ker=3 stops at 1.
    Tensor<float> impulse(1, 1, 15, 15);
    impulse.at(0, 0, 7, 7) = 1.0f;
    const auto s3 = nonzero_support(scaled_hessian_filter(impulse, 3).lambda);
    const auto s7 = nonzero_support(scaled_hessian_filter(impulse, 7).lambda);
    auto radius = [](const std::set<std::pair<int, int>>& s) {
        int r = 0;
        for (const auto& [y, x] : s) r = std::max({r, std::abs(y - 7), std::abs(x - 7)});
        return r;
    };
    CHECK(radius(s3) == 1);
    CHECK(radius(s7) == 3);

    // Step edge: the ker=3 response is a strict subset of the ker=7 response
    // (the spatially extended edge fills the dilated taps' gaps).
    Tensor<float> step(1, 1, 9, 16);
    for (int y = 0; y < 9; ++y) {
        for (int x = 8; x < 16; ++x) step.at(0, 0, y, x) = 1.0f;
    }
    const auto e3 = nonzero_support(scaled_hessian_filter(step, 3).lambda, 1e-7f);
    const auto e7 = nonzero_support(scaled_hessian_filter(step, 7).lambda, 1e-7f);
    CHECK(e3.size() < e7.size());
    for (const auto& p : e3) CHECK(e7.count(p) == 1);
}

TEST_CASE("shift equivariance away from borders") {
    std::mt19937 rng(61);
    Tensor<float> x(1, 1, 14, 14);
    fill_uniform(x, rng);
    Tensor<float> shifted(1, 1, 14, 14);
    for (int y = 1; y < 14; ++y) {
        for (int xc = 1; xc < 14; ++xc) {
            shifted.at(0, 0, y, xc) = x.at(0, 0, y - 1, xc - 1);
        }
    }
    for (int ker : {3, 5}) {
        const auto base = scaled_hessian_filter(x, ker);
        const auto moved = scaled_hessian_filter(shifted, ker);
        const int m = ker;  // both stencils fully interior in both frames
        for (int y = m; y < 14 - m; ++y) {
            for (int xc = m; xc < 14 - m; ++xc) {
                CHECK(moved.lambda.at(0, 0, y, xc) ==
                      doctest::Approx(base.lambda.at(0, 0, y - 1, xc - 1)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("mshf: channel averaging and scale ordering") {
    std::mt19937 rng(67);
    Tensor<float> one(1, 1, 10, 10);
    fill_uniform(one, rng);

    const Tensor<float> fused = mshf(one, {3, 5, 7});
    CHECK(fused.shape() == Shape{1, 3, 10, 10});
    for (std::size_t s = 0; s < 3; ++s) {
        const auto direct = scaled_hessian_filter(one, std::vector<int>{3, 5, 7}[s]);
        for (int y = 0; y < 10; ++y) {
            for (int x = 0; x < 10; ++x) {
                CHECK(fused.at(0, static_cast<int>(s), y, x) ==
                      doctest::Approx(direct.lambda.at(0, 0, y, x)));
            }
        }
    }

    // Two identical channels average to the single-channel map.
    Tensor<float> two(1, 2, 10, 10);
    for (int c = 0; c < 2; ++c) {
        for (int y = 0; y < 10; ++y) {
            for (int x = 0; x < 10; ++x) two.at(0, c, y, x) = one.at(0, 0, y, x);
        }
    }
    CHECK(max_abs_diff(mshf(two, {3, 5, 7}), fused) <= 1e-6);

    // Four random channels: each output channel is the mean of per-channel maps.
    Tensor<float> four(1, 4, 10, 10);
    fill_uniform(four, rng);
    const Tensor<float> out = mshf(four, {3, 5});
    for (std::size_t s = 0; s < 2; ++s) {
        const auto per_channel = scaled_hessian_filter(four, std::vector<int>{3, 5}[s]);
        for (int y = 0; y < 10; ++y) {
            for (int x = 0; x < 10; ++x) {
                double mean = 0;
                for (int c = 0; c < 4; ++c) mean += per_channel.lambda.at(0, c, y, x);
                mean /= 4.0;
                CHECK(std::abs(out.at(0, static_cast<int>(s), y, x) - mean) <= 1e-6);
            }
        }
    }

    CHECK_THROWS_AS(mshf(one, {}), std::invalid_argument);
}

TEST_CASE("eigen bench: correctness gate and degenerate sizes") {
    // 1x1x1 runs through both paths.
    const auto rows = run_eigen_bench({{1, 1, 1}, {4, 6, 6}}, 3);
    CHECK(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.mean_ms >= 0.0);
        CHECK((row.method == "closed_form" || row.method == "eigen_solver"));
    }
    const std::string csv = eigen_bench_csv(rows);
    CHECK(csv.rfind("size,method,mean_ms,stddev_ms\n", 0) == 0);
}
