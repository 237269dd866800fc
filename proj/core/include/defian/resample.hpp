// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defian/image.hpp"

namespace defian {

// Keys cubic kernel with a = -0.5.
double bicubic_kernel(double x);

// Separable bicubic resampling with edge clamping. When shrinking, the kernel
// is stretched by the inverse scale so the pass low-passes before decimating.
ImageBuffer bicubic_resize(const ImageBuffer& img, int out_width, int out_height);

// Convenience wrapper: scale both axes by `scale` (rounded to >= 1 pixel).
ImageBuffer bicubic_resize_scale(const ImageBuffer& img, double scale);

} // namespace defian
