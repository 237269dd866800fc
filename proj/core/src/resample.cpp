// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace defian {

double bicubic_kernel(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    }
    return 0.0;
}

namespace {

struct TapSet {
    std::vector<int> index;     // clamped source indices, flattened
    std::vector<double> weight; // matching weights, normalized per output
    int taps = 0;
};

// Sampling weights for one axis: out_i maps to (out_i + 0.5)/scale - 0.5 in
// source coordinates; when shrinking the kernel is stretched by 1/scale.
TapSet make_taps(int in_extent, int out_extent) {
    const double scale = static_cast<double>(out_extent) / in_extent;
    const double support_scale = std::min(scale, 1.0);
    const double radius = 2.0 / support_scale;
    const int taps = static_cast<int>(std::ceil(radius)) * 2 + 1;

    TapSet set;
    set.taps = taps;
    set.index.resize(static_cast<std::size_t>(out_extent) * taps);
    set.weight.resize(static_cast<std::size_t>(out_extent) * taps);

    for (int i = 0; i < out_extent; ++i) {
        const double centre = (i + 0.5) / scale - 0.5;
        const int left = static_cast<int>(std::floor(centre - radius));
        double sum = 0.0;
        for (int t = 0; t < taps; ++t) {
            const int src = left + t;
            const double w = bicubic_kernel((centre - src) * support_scale) * support_scale;
            set.index[static_cast<std::size_t>(i) * taps + t] =
                std::clamp(src, 0, in_extent - 1);
            set.weight[static_cast<std::size_t>(i) * taps + t] = w;
            sum += w;
        }
        for (int t = 0; t < taps; ++t) {
            set.weight[static_cast<std::size_t>(i) * taps + t] /= sum;
        }
    }
    return set;
}

} // namespace

ImageBuffer bicubic_resize(const ImageBuffer& img, int out_width, int out_height) {
    require(out_width >= 1 && out_height >= 1, "bicubic_resize: target must be >= 1 pixel");

    const TapSet hx = make_taps(img.width, out_width);
    const TapSet vy = make_taps(img.height, out_height);

    // Horizontal pass into a float intermediate, then vertical pass.
    std::vector<double> mid(static_cast<std::size_t>(out_width) * img.height * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = 0; t < hx.taps; ++t) {
                    const int sx = hx.index[static_cast<std::size_t>(x) * hx.taps + t];
                    acc += hx.weight[static_cast<std::size_t>(x) * hx.taps + t] *
                           img.at(sx, y, c);
                }
                mid[(static_cast<std::size_t>(y) * out_width + x) * 3 + c] = acc;
            }
        }
    }

    ImageBuffer out(out_width, out_height);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = 0; t < vy.taps; ++t) {
                    const int sy = vy.index[static_cast<std::size_t>(y) * vy.taps + t];
                    acc += vy.weight[static_cast<std::size_t>(y) * vy.taps + t] *
                           mid[(static_cast<std::size_t>(sy) * out_width + x) * 3 + c];
                }
                out.at(x, y, c) = static_cast<std::uint8_t>(
                    std::clamp(std::round(acc), 0.0, 255.0));
            }
        }
    }
    return out;
}

ImageBuffer bicubic_resize_scale(const ImageBuffer& img, double scale) {
    require(scale > 0.0, "bicubic_resize: scale must be positive");
    const int w = std::max(1, static_cast<int>(std::round(img.width * scale)));
    const int h = std::max(1, static_cast<int>(std::round(img.height * scale)));
    return bicubic_resize(img, w, h);
}

} // namespace defian
