// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/conv_kernels.hpp"

#include <algorithm>

#include "defian/parallel.hpp"

namespace defian {

template <typename T>
void plane_axpy(T* dst, int dh, int dw, const T* src, int sh, int sw,
                T weight, int oy, int ox) {
    const int y0 = std::max(0, -oy);
    const int y1 = std::min(dh, sh - oy);
    const int x0 = std::max(0, -ox);
    const int x1 = std::min(dw, sw - ox);
    for (int y = y0; y < y1; ++y) {
        T* d = dst + static_cast<std::int64_t>(y) * dw;
        const T* s = src + static_cast<std::int64_t>(y + oy) * sw + ox;
        for (int x = x0; x < x1; ++x) {
            d[x] += weight * s[x];
        }
    }
}

template <typename T>
T plane_dot(const T* a, int ah, int aw, const T* b, int bh, int bw, int oy, int ox) {
    const int y0 = std::max(0, -oy);
    const int y1 = std::min(ah, bh - oy);
    const int x0 = std::max(0, -ox);
    const int x1 = std::min(aw, bw - ox);
    T acc = T(0);
    for (int y = y0; y < y1; ++y) {
        const T* pa = a + static_cast<std::int64_t>(y) * aw;
        const T* pb = b + static_cast<std::int64_t>(y + oy) * bw + ox;
        for (int x = x0; x < x1; ++x) {
            acc += pa[x] * pb[x];
        }
    }
    return acc;
}

namespace {

// Kernel tap (ky, kx) hits input offset ky*dilation - padding.
inline int tap_offset(int k_index, int dilation, int padding) {
    return k_index * dilation - padding;
}

} // namespace

template <typename T>
void conv2d_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                    const ConvSpec& spec, Tensor<T>& out) {
    const int k = spec.kernel;
    const int cin = spec.in_channels;
    const int cout = spec.out_channels;
    parallel_for(0, static_cast<std::int64_t>(in.n()) * cout, [&](std::int64_t job) {
        const int n = static_cast<int>(job / cout);
        const int oc = static_cast<int>(job % cout);
        T* dst = out.plane(n, oc);
        const T init = bias ? bias[oc] : T(0);
        std::fill(dst, dst + static_cast<std::int64_t>(out.h()) * out.w(), init);
        for (int ic = 0; ic < cin; ++ic) {
            const T* src = in.plane(n, ic);
            const T* wk = weight.plane(oc, ic);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    plane_axpy(dst, out.h(), out.w(), src, in.h(), in.w(),
                               wk[ky * k + kx],
                               tap_offset(ky, spec.dilation, spec.padding),
                               tap_offset(kx, spec.dilation, spec.padding));
                }
            }
        }
    });
}

template <typename T>
void conv2d_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                           const ConvSpec& spec, Tensor<T>& gin) {
    const int k = spec.kernel;
    parallel_for(0, static_cast<std::int64_t>(gin.n()) * spec.in_channels, [&](std::int64_t job) {
        const int n = static_cast<int>(job / spec.in_channels);
        const int ic = static_cast<int>(job % spec.in_channels);
        T* dst = gin.plane(n, ic);
        for (int oc = 0; oc < spec.out_channels; ++oc) {
            const T* src = gout.plane(n, oc);
            const T* wk = weight.plane(oc, ic);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    // Scatter of the forward gather: reverse the tap offset.
                    plane_axpy(dst, gin.h(), gin.w(), src, gout.h(), gout.w(),
                               wk[ky * k + kx],
                               -tap_offset(ky, spec.dilation, spec.padding),
                               -tap_offset(kx, spec.dilation, spec.padding));
                }
            }
        }
    });
}

template <typename T>
void conv2d_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                            const ConvSpec& spec, Tensor<T>& gweight) {
    const int k = spec.kernel;
    parallel_for(0, static_cast<std::int64_t>(spec.out_channels) * spec.in_channels,
                 [&](std::int64_t job) {
        const int oc = static_cast<int>(job / spec.in_channels);
        const int ic = static_cast<int>(job % spec.in_channels);
        T* gw = gweight.plane(oc, ic);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T acc = T(0);
                for (int n = 0; n < gout.n(); ++n) {
                    acc += plane_dot(gout.plane(n, oc), gout.h(), gout.w(),
                                     in.plane(n, ic), in.h(), in.w(),
                                     tap_offset(ky, spec.dilation, spec.padding),
                                     tap_offset(kx, spec.dilation, spec.padding));
                }
                gw[ky * k + kx] += acc;
            }
        }
    });
}

template <typename T>
void deconv2d_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                      const ConvSpec& spec, Tensor<T>& out) {
    const int k = spec.kernel;
    parallel_for(0, static_cast<std::int64_t>(in.n()) * spec.out_channels,
                 [&](std::int64_t job) {
        const int n = static_cast<int>(job / spec.out_channels);
        const int oc = static_cast<int>(job % spec.out_channels);
        T* dst = out.plane(n, oc);
        const T init = bias ? bias[oc] : T(0);
        std::fill(dst, dst + static_cast<std::int64_t>(out.h()) * out.w(), init);
        for (int ic = 0; ic < spec.in_channels; ++ic) {
            const T* src = in.plane(n, ic);
            const T* wk = weight.plane(ic, oc);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    plane_axpy(dst, out.h(), out.w(), src, in.h(), in.w(),
                               wk[ky * k + kx],
                               -tap_offset(ky, spec.dilation, spec.padding),
                               -tap_offset(kx, spec.dilation, spec.padding));
                }
            }
        }
    });
}

template <typename T>
void deconv2d_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                             const ConvSpec& spec, Tensor<T>& gin) {
    const int k = spec.kernel;
    parallel_for(0, static_cast<std::int64_t>(gin.n()) * spec.in_channels,
                 [&](std::int64_t job) {
        const int n = static_cast<int>(job / spec.in_channels);
        const int ic = static_cast<int>(job % spec.in_channels);
        T* dst = gin.plane(n, ic);
        for (int oc = 0; oc < spec.out_channels; ++oc) {
            const T* src = gout.plane(n, oc);
            const T* wk = weight.plane(ic, oc);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    plane_axpy(dst, gin.h(), gin.w(), src, gout.h(), gout.w(),
                               wk[ky * k + kx],
                               tap_offset(ky, spec.dilation, spec.padding),
                               tap_offset(kx, spec.dilation, spec.padding));
                }
            }
        }
    });
}

template <typename T>
void deconv2d_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                              const ConvSpec& spec, Tensor<T>& gweight) {
    const int k = spec.kernel;
    parallel_for(0, static_cast<std::int64_t>(spec.in_channels) * spec.out_channels,
                 [&](std::int64_t job) {
        const int ic = static_cast<int>(job / spec.out_channels);
        const int oc = static_cast<int>(job % spec.out_channels);
        T* gw = gweight.plane(ic, oc);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T acc = T(0);
                for (int n = 0; n < gout.n(); ++n) {
                    acc += plane_dot(in.plane(n, ic), in.h(), in.w(),
                                     gout.plane(n, oc), gout.h(), gout.w(),
                                     tap_offset(ky, spec.dilation, spec.padding),
                                     tap_offset(kx, spec.dilation, spec.padding));
                }
                gw[ky * k + kx] += acc;
            }
        }
    });
}

template <typename T>
void depthwise_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                       int kernel, int dilation, int padding, Tensor<T>& out) {
    parallel_for(0, static_cast<std::int64_t>(in.n()) * in.c(), [&](std::int64_t job) {
        const int n = static_cast<int>(job / in.c());
        const int ch = static_cast<int>(job % in.c());
        T* dst = out.plane(n, ch);
        const T init = bias ? bias[ch] : T(0);
        std::fill(dst, dst + static_cast<std::int64_t>(out.h()) * out.w(), init);
        const T* src = in.plane(n, ch);
        const T* wk = weight.plane(ch, 0);
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
                plane_axpy(dst, out.h(), out.w(), src, in.h(), in.w(),
                           wk[ky * kernel + kx],
                           tap_offset(ky, dilation, padding),
                           tap_offset(kx, dilation, padding));
            }
        }
    });
}

template <typename T>
void depthwise_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                              int kernel, int dilation, int padding, Tensor<T>& gin) {
    parallel_for(0, static_cast<std::int64_t>(gin.n()) * gin.c(), [&](std::int64_t job) {
        const int n = static_cast<int>(job / gin.c());
        const int ch = static_cast<int>(job % gin.c());
        T* dst = gin.plane(n, ch);
        const T* src = gout.plane(n, ch);
        const T* wk = weight.plane(ch, 0);
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
                plane_axpy(dst, gin.h(), gin.w(), src, gout.h(), gout.w(),
                           wk[ky * kernel + kx],
                           -tap_offset(ky, dilation, padding),
                           -tap_offset(kx, dilation, padding));
            }
        }
    });
}

template <typename T>
void depthwise_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                               int kernel, int dilation, int padding, Tensor<T>& gweight) {
    parallel_for(0, in.c(), [&](std::int64_t ch) {
        T* gw = gweight.plane(static_cast<int>(ch), 0);
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
                T acc = T(0);
                for (int n = 0; n < gout.n(); ++n) {
                    acc += plane_dot(gout.plane(n, static_cast<int>(ch)), gout.h(), gout.w(),
                                     in.plane(n, static_cast<int>(ch)), in.h(), in.w(),
                                     tap_offset(ky, dilation, padding),
                                     tap_offset(kx, dilation, padding));
                }
                gw[ky * kernel + kx] += acc;
            }
        }
    });
}

template <typename T>
void bias_backward(const Tensor<T>& gout, T* gbias) {
    for (int n = 0; n < gout.n(); ++n) {
        for (int c = 0; c < gout.c(); ++c) {
            const T* p = gout.plane(n, c);
            T acc = T(0);
            const std::int64_t hw = static_cast<std::int64_t>(gout.h()) * gout.w();
            for (std::int64_t i = 0; i < hw; ++i) acc += p[i];
            gbias[c] += acc;
        }
    }
}

#define DEFIAN_INSTANTIATE_CONV(T)                                                          \
    template void plane_axpy<T>(T*, int, int, const T*, int, int, T, int, int);             \
    template T plane_dot<T>(const T*, int, int, const T*, int, int, int, int);              \
    template void conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const T*,           \
                                    const ConvSpec&, Tensor<T>&);                           \
    template void conv2d_backward_input<T>(const Tensor<T>&, const Tensor<T>&,              \
                                           const ConvSpec&, Tensor<T>&);                    \
    template void conv2d_backward_weight<T>(const Tensor<T>&, const Tensor<T>&,             \
                                            const ConvSpec&, Tensor<T>&);                   \
    template void deconv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const T*,         \
                                      const ConvSpec&, Tensor<T>&);                         \
    template void deconv2d_backward_input<T>(const Tensor<T>&, const Tensor<T>&,            \
                                             const ConvSpec&, Tensor<T>&);                  \
    template void deconv2d_backward_weight<T>(const Tensor<T>&, const Tensor<T>&,           \
                                              const ConvSpec&, Tensor<T>&);                 \
    template void depthwise_forward<T>(const Tensor<T>&, const Tensor<T>&, const T*,        \
                                       int, int, int, Tensor<T>&);                          \
    template void depthwise_backward_input<T>(const Tensor<T>&, const Tensor<T>&,           \
                                              int, int, int, Tensor<T>&);                   \
    template void depthwise_backward_weight<T>(const Tensor<T>&, const Tensor<T>&,          \
                                               int, int, int, Tensor<T>&);                  \
    template void bias_backward<T>(const Tensor<T>&, T*);

DEFIAN_INSTANTIATE_CONV(float)
DEFIAN_INSTANTIATE_CONV(double)

#undef DEFIAN_INSTANTIATE_CONV

} // namespace defian
