// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/hessian.hpp"

#include <cmath>
#include <string>

#include "defian/conv_kernels.hpp"

namespace defian {

HessianKernelSet HessianKernelSet::make(int ker) {
    require(supported(ker), "hessian: unsupported scale " + std::to_string(ker) +
                                " (supported: 3, 5, 7)");
    HessianKernelSet ks;
    ks.ker = ker;
    ks.g_hh.assign(static_cast<std::size_t>(ker) * ker, 0.0f);
    ks.g_vv.assign(static_cast<std::size_t>(ker) * ker, 0.0f);
    ks.g_hv.assign(static_cast<std::size_t>(ker) * ker, 0.0f);

    const int mid = ker / 2;
    // hh: [1, 0..., -2, ...0, 1] along the centre row; vv is its transpose.
    ks.g_hh[mid * ker + 0] = 1.0f;
    ks.g_hh[mid * ker + mid] = -2.0f;
    ks.g_hh[mid * ker + (ker - 1)] = 1.0f;
    ks.g_vv[0 * ker + mid] = 1.0f;
    ks.g_vv[mid * ker + mid] = -2.0f;
    ks.g_vv[(ker - 1) * ker + mid] = 1.0f;
    // hv: outer product of [1, {0}, -1] with itself.
    ks.g_hv[0 * ker + 0] = 1.0f;
    ks.g_hv[0 * ker + (ker - 1)] = -1.0f;
    ks.g_hv[(ker - 1) * ker + 0] = -1.0f;
    ks.g_hv[(ker - 1) * ker + (ker - 1)] = 1.0f;
    return ks;
}

namespace {

// Applies one ker x ker stencil depthwise with zero padding (size-preserving).
template <typename T>
void apply_stencil(const Tensor<T>& x, const std::vector<float>& stencil, int ker,
                   Tensor<T>& out) {
    const int pad = ker / 2;
    out.zero();
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            const T* src = x.plane(n, c);
            T* dst = out.plane(n, c);
            for (int ky = 0; ky < ker; ++ky) {
                for (int kx = 0; kx < ker; ++kx) {
                    const float w = stencil[static_cast<std::size_t>(ky) * ker + kx];
                    if (w == 0.0f) continue;
                    plane_axpy(dst, x.h(), x.w(), src, x.h(), x.w(),
                               static_cast<T>(w), ky - pad, kx - pad);
                }
            }
        }
    }
}

} // namespace

template <typename T>
void hessian_gradients(const Tensor<T>& x, const HessianKernelSet& ks,
                       Tensor<T>& g_hh, Tensor<T>& g_vv, Tensor<T>& g_hv) {
    require(x.h() >= ks.ker && x.w() >= ks.ker,
            "hessian_gradients: input " + x.shape().str() + " smaller than kernel " +
                std::to_string(ks.ker));
    g_hh = Tensor<T>(x.shape());
    g_vv = Tensor<T>(x.shape());
    g_hv = Tensor<T>(x.shape());
    apply_stencil(x, ks.g_hh, ks.ker, g_hh);
    apply_stencil(x, ks.g_vv, ks.ker, g_vv);
    apply_stencil(x, ks.g_hv, ks.ker, g_hv);
}

template <typename T>
EigenMap<T> max_eigenvalue(const Tensor<T>& g_hh, const Tensor<T>& g_vv,
                           const Tensor<T>& g_hv) {
    require(g_hh.shape() == g_vv.shape() && g_hh.shape() == g_hv.shape(),
            "max_eigenvalue: gradient shapes differ");
    EigenMap<T> map{Tensor<T>(g_hh.shape())};
    T* out = map.lambda.data();
    const T* a = g_hh.data();
    const T* d = g_vv.data();
    const T* b = g_hv.data();
    for (std::int64_t i = 0; i < g_hh.size(); ++i) {
        const T diff = a[i] - d[i];
        T rad = diff * diff + T(4) * b[i] * b[i];
        if (rad < T(0)) rad = T(0);
        out[i] = (a[i] + d[i] + std::sqrt(rad)) / T(2);
    }
    return map;
}

template <typename T>
EigenMap<T> scaled_hessian_filter(const Tensor<T>& x, int ker) {
    const HessianKernelSet ks = HessianKernelSet::make(ker);
    Tensor<T> g_hh, g_vv, g_hv;
    hessian_gradients(x, ks, g_hh, g_vv, g_hv);
    return max_eigenvalue(g_hh, g_vv, g_hv);
}

template <typename T>
Tensor<T> mshf(const Tensor<T>& x, const std::vector<int>& scales) {
    require(!scales.empty(), "mshf: empty scale list");
    Tensor<T> out(x.n(), static_cast<int>(scales.size()), x.h(), x.w());
    const std::int64_t hw = static_cast<std::int64_t>(x.h()) * x.w();
    const T scale = T(1) / static_cast<T>(x.c());
    for (std::size_t s = 0; s < scales.size(); ++s) {
        EigenMap<T> map = scaled_hessian_filter(x, scales[s]);
        for (int n = 0; n < x.n(); ++n) {
            T* dst = out.plane(n, static_cast<int>(s));
            for (int c = 0; c < x.c(); ++c) {
                const T* src = map.lambda.plane(n, c);
                for (std::int64_t i = 0; i < hw; ++i) dst[i] += src[i];
            }
            for (std::int64_t i = 0; i < hw; ++i) dst[i] *= scale;
        }
    }
    return out;
}

double symmetric2x2_max_eigenvalue(double a, double d, double b) {
    // One Jacobi rotation diagonalizes a symmetric 2x2 exactly.
    const double theta = 0.5 * std::atan2(2.0 * b, a - d);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double l1 = c * c * a + 2.0 * s * c * b + s * s * d;
    const double l2 = s * s * a - 2.0 * s * c * b + c * c * d;
    return l1 > l2 ? l1 : l2;
}

double symmetric2x2_min_eigenvalue(double a, double d, double b) {
    const double theta = 0.5 * std::atan2(2.0 * b, a - d);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double l1 = c * c * a + 2.0 * s * c * b + s * s * d;
    const double l2 = s * s * a - 2.0 * s * c * b + c * c * d;
    return l1 < l2 ? l1 : l2;
}

template <typename T>
Tensor<T> max_eigenvalue_by_solver(const Tensor<T>& g_hh, const Tensor<T>& g_vv,
                                   const Tensor<T>& g_hv) {
    require(g_hh.shape() == g_vv.shape() && g_hh.shape() == g_hv.shape(),
            "max_eigenvalue_by_solver: gradient shapes differ");
    Tensor<T> out(g_hh.shape());
    for (std::int64_t i = 0; i < g_hh.size(); ++i) {
        out[i] = static_cast<T>(symmetric2x2_max_eigenvalue(
            static_cast<double>(g_hh[i]), static_cast<double>(g_vv[i]),
            static_cast<double>(g_hv[i])));
    }
    return out;
}

#define DEFIAN_INSTANTIATE_HESSIAN(T)                                                   \
    template void hessian_gradients<T>(const Tensor<T>&, const HessianKernelSet&,       \
                                       Tensor<T>&, Tensor<T>&, Tensor<T>&);             \
    template EigenMap<T> max_eigenvalue<T>(const Tensor<T>&, const Tensor<T>&,          \
                                           const Tensor<T>&);                           \
    template EigenMap<T> scaled_hessian_filter<T>(const Tensor<T>&, int);               \
    template Tensor<T> mshf<T>(const Tensor<T>&, const std::vector<int>&);              \
    template Tensor<T> max_eigenvalue_by_solver<T>(const Tensor<T>&, const Tensor<T>&,  \
                                                   const Tensor<T>&);

DEFIAN_INSTANTIATE_HESSIAN(float)
DEFIAN_INSTANTIATE_HESSIAN(double)

#undef DEFIAN_INSTANTIATE_HESSIAN

} // namespace defian
