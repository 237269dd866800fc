// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>

namespace defian {

namespace {

struct FileHandle {
    FILE* fp = nullptr;
    explicit FileHandle(const std::string& path, const char* mode)
        : fp(std::fopen(path.c_str(), mode)) {}
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

} // namespace

ImageBuffer read_png(const std::string& path) {
    FileHandle file(path, "rb");
    if (!file.fp) throw std::runtime_error("png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: info allocation failed");
    }
    std::vector<png_bytep> rows;
    ImageBuffer img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to decode " + path);
    }

    png_init_io(png, file.fp);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    img = ImageBuffer(static_cast<int>(width), static_cast<int>(height));
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

static void write_png_impl(const std::string& path, int width, int height,
                           const std::uint8_t* data, int color_type) {
    FileHandle file(path, "wb");
    if (!file.fp) throw std::runtime_error("png: cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png: info allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to encode " + path);
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(
                               data + static_cast<std::size_t>(y) * width * channels));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_png(const std::string& path, const ImageBuffer& img) {
    require(img.width >= 1 && img.height >= 1, "png: empty image");
    write_png_impl(path, img.width, img.height, img.pixels.data(), PNG_COLOR_TYPE_RGB);
}

void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& gray) {
    require(width >= 1 && height >= 1 &&
                gray.size() == static_cast<std::size_t>(width) * height,
            "png: grayscale buffer does not match dimensions");
    write_png_impl(path, width, height, gray.data(), PNG_COLOR_TYPE_GRAY);
}

Tensor<float> image_to_tensor(const ImageBuffer& img) {
    Tensor<float> t(1, 3, img.height, img.width);
    for (int c = 0; c < 3; ++c) {
        float* plane = t.plane(0, c);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                plane[static_cast<std::int64_t>(y) * img.width + x] =
                    static_cast<float>(img.at(x, y, c)) / 255.0f;
            }
        }
    }
    return t;
}

ImageBuffer tensor_to_image(const Tensor<float>& t) {
    require(t.n() >= 1 && t.c() == 3, "tensor_to_image: expected an RGB tensor, got " +
                                          t.shape().str());
    ImageBuffer img(t.w(), t.h());
    for (int c = 0; c < 3; ++c) {
        const float* plane = t.plane(0, c);
        for (int y = 0; y < t.h(); ++y) {
            for (int x = 0; x < t.w(); ++x) {
                float v = plane[static_cast<std::int64_t>(y) * t.w() + x] * 255.0f;
                v = std::round(v);
                if (v < 0.0f) v = 0.0f;
                if (v > 255.0f) v = 255.0f;
                img.at(x, y, c) = static_cast<std::uint8_t>(v);
            }
        }
    }
    return img;
}

ImageBuffer crop(const ImageBuffer& img, int x0, int y0, int w, int h) {
    require(x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x0 + w <= img.width &&
                y0 + h <= img.height,
            "crop: window outside the image");
    ImageBuffer out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
        }
    }
    return out;
}

} // namespace defian
