// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defian/image.hpp"

namespace defian {

// One grayscale plane in [0, 255], double precision.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int w, int h) : width(w), height(h), v(static_cast<std::size_t>(w) * h, 0.0) {}
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
};

// Studio-range BT.601 luma: Y = (65.738 R + 129.057 G + 25.064 B)/256 + 16,
// the convention the SR benchmarks use. White maps to 235, black to 16.
Plane luminance(const ImageBuffer& img);

// Removes `border` pixels on every side.
Plane shave(const Plane& p, int border);

// 10*log10(255^2 / MSE); +infinity for identical planes.
double psnr(const Plane& a, const Plane& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// L=255, mean over valid window positions. Requires min(width, height) >= 11.
double ssim(const Plane& a, const Plane& b);

} // namespace defian
