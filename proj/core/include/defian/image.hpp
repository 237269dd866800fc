// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "defian/tensor.hpp"

namespace defian {

// 8-bit RGB image, row-major, 3 bytes per pixel.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    ImageBuffer() = default;
    ImageBuffer(int w, int h)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * h * 3, 0) {
        require(w >= 1 && h >= 1, "image: dimensions must be >= 1");
    }

    std::uint8_t& at(int x, int y, int ch) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }
    std::uint8_t at(int x, int y, int ch) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }
};

// PNG I/O. Paletted, grayscale, 16-bit and alpha inputs are converted to
// 8-bit RGB on read; writes are plain 8-bit RGB (or 8-bit grayscale).
ImageBuffer read_png(const std::string& path);
void write_png(const std::string& path, const ImageBuffer& img);
void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& gray);

// (1, 3, h, w) tensor in [0, 1] <-> 8-bit RGB. tensor_to_image clamps and
// rounds to the nearest level.
Tensor<float> image_to_tensor(const ImageBuffer& img);
ImageBuffer tensor_to_image(const Tensor<float>& t);

ImageBuffer crop(const ImageBuffer& img, int x0, int y0, int w, int h);

} // namespace defian
