// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "defian/tensor.hpp"

namespace defian {

// The three second-derivative stencils at scale `ker`. All entries sum to
// zero, so any constant region filters to zero. The taps sit on a 3x3 grid
// dilated by (ker-1)/2:
//   ker=3  hh row [1, -2, 1]            hv corners at distance 1
//   ker=5  hh row [1, 0, -2, 0, 1]      hv corners at distance 2
//   ker=7  hh row [1, 0, 0, -2, 0, 0, 1]  hv corners at distance 3
// vv is always the transpose of hh, and hv is the outer product of the
// matching [1, 0...0, -1] vector with itself.
struct HessianKernelSet {
    int ker = 3;
    std::vector<float> g_hh;  // ker*ker, row-major
    std::vector<float> g_vv;
    std::vector<float> g_hv;

    static HessianKernelSet make(int ker);
    static bool supported(int ker) { return ker == 3 || ker == 5 || ker == 7; }
};

// Per-pixel maximum eigenvalue of the Hessian, same shape as the filtered
// input. For a constant region the map is exactly zero.
template <typename T>
struct EigenMap {
    Tensor<T> lambda;
};

// Depthwise, size-preserving, zero-padded convolution of x with the three
// stencils of ks. Requires h, w >= ker.
template <typename T>
void hessian_gradients(const Tensor<T>& x, const HessianKernelSet& ks,
                       Tensor<T>& g_hh, Tensor<T>& g_vv, Tensor<T>& g_hv);

// lambda = (g_hh + g_vv)/2 + sqrt((g_hh - g_vv)^2 + 4 g_hv^2)/2, the larger
// root of the 2x2 symmetric matrix [[g_hh, g_hv], [g_hv, g_vv]]. The radicand
// is clamped at zero to absorb float round-off.
template <typename T>
EigenMap<T> max_eigenvalue(const Tensor<T>& g_hh, const Tensor<T>& g_vv,
                           const Tensor<T>& g_hv);

// hessian_gradients followed by max_eigenvalue for one scale.
template <typename T>
EigenMap<T> scaled_hessian_filter(const Tensor<T>& x, int ker);

// Multi-scale filtering: one channel-averaged eigenvalue map per scale,
// concatenated along the channel axis in the given scale order.
template <typename T>
Tensor<T> mshf(const Tensor<T>& x, const std::vector<int>& scales);

// Independent route for the same eigenvalues: diagonalize each per-pixel 2x2
// symmetric matrix with a Jacobi rotation and take the larger value. Used as
// the correctness oracle and as the slow side of the eigen benchmark.
double symmetric2x2_max_eigenvalue(double a, double d, double b);
double symmetric2x2_min_eigenvalue(double a, double d, double b);

template <typename T>
Tensor<T> max_eigenvalue_by_solver(const Tensor<T>& g_hh, const Tensor<T>& g_vv,
                                   const Tensor<T>& g_hv);

} // namespace defian
