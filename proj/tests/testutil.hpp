// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "defian/autodiff.hpp"
#include "defian/tensor.hpp"

namespace defian::test {

template <typename T>
void fill_uniform(Tensor<T>& t, std::mt19937& rng, T lo = T(-1), T hi = T(1)) {
    std::uniform_real_distribution<double> dist(static_cast<double>(lo),
                                                static_cast<double>(hi));
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(dist(rng));
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double worst = 0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
    }
    return worst;
}

// Six-nested-loop reference convolution, deliberately independent of the
// production kernels.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& in, const Tensor<T>& w, const T* bias,
                       const ConvSpec& spec) {
    const int ho = spec.out_extent(in.h());
    const int wo = spec.out_extent(in.w());
    Tensor<T> out(in.n(), spec.out_channels, ho, wo);
    for (int n = 0; n < in.n(); ++n) {
        for (int oc = 0; oc < spec.out_channels; ++oc) {
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox) {
                    T acc = bias ? bias[oc] : T(0);
                    for (int ic = 0; ic < spec.in_channels; ++ic) {
                        for (int ky = 0; ky < spec.kernel; ++ky) {
                            for (int kx = 0; kx < spec.kernel; ++kx) {
                                const int iy = oy + ky * spec.dilation - spec.padding;
                                const int ix = ox + kx * spec.dilation - spec.padding;
                                if (iy < 0 || iy >= in.h() || ix < 0 || ix >= in.w()) continue;
                                acc += in.at(n, ic, iy, ix) * w.at(oc, ic, ky, kx);
                            }
                        }
                    }
                    out.at(n, oc, oy, ox) = acc;
                }
            }
        }
    }
    return out;
}

template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
    double acc = 0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

} // namespace defian::test
