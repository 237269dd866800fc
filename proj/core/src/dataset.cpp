// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace defian {

namespace fs = std::filesystem;

Dataset load_dataset(const std::string& hr_dir, const std::string& lr_dir, int scale) {
    require(scale >= 1, "dataset: scale must be >= 1");
    if (!fs::is_directory(hr_dir)) {
        throw std::runtime_error("dataset: " + hr_dir + " is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(hr_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw std::runtime_error("dataset: no .png files in " + hr_dir);
    }

    Dataset data;
    data.scale = scale;
    for (const auto& path : files) {
        ImageBuffer hr = read_png(path.string());
        // Align to the scale so LR/HR pixel grids correspond exactly.
        const int aw = (hr.width / scale) * scale;
        const int ah = (hr.height / scale) * scale;
        require(aw >= scale && ah >= scale,
                "dataset: " + path.string() + " is smaller than one LR pixel");
        if (aw != hr.width || ah != hr.height) hr = crop(hr, 0, 0, aw, ah);

        ImageBuffer lr;
        if (lr_dir.empty()) {
            lr = bicubic_resize(hr, aw / scale, ah / scale);
        } else {
            const fs::path lr_path = fs::path(lr_dir) / path.filename();
            if (!fs::exists(lr_path)) {
                throw std::runtime_error("dataset: missing LR file " + lr_path.string());
            }
            lr = read_png(lr_path.string());
            require(lr.width == aw / scale && lr.height == ah / scale,
                    "dataset: " + lr_path.string() + " is not the x" +
                        std::to_string(scale) + " reduction of its HR image");
        }
        data.names.push_back(path.stem().string());
        data.hr.push_back(std::move(hr));
        data.lr.push_back(std::move(lr));
    }
    return data;
}

Dataset synthetic_dataset(int count, int hr_size, int scale, unsigned seed) {
    require(count >= 1 && hr_size >= scale, "synthetic_dataset: bad arguments");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Dataset data;
    data.scale = scale;
    const int size = (hr_size / scale) * scale;
    for (int i = 0; i < count; ++i) {
        ImageBuffer img(size, size);
        // Smooth ramps plus a low-frequency sinusoid per channel; band-limited
        // content a small model can actually fit.
        const double fx = 1.0 + 2.0 * unit(rng);
        const double fy = 1.0 + 2.0 * unit(rng);
        const double phase = 6.28318530717958647692 * unit(rng);
        const double gx = unit(rng), gy = unit(rng);
        for (int c = 0; c < 3; ++c) {
            const double offset = 0.2 + 0.6 * unit(rng);
            const double amp = 0.15 + 0.2 * unit(rng);
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    const double u = static_cast<double>(x) / size;
                    const double v = static_cast<double>(y) / size;
                    double value = offset + 0.25 * (gx * u + gy * v) +
                                   amp * std::sin(6.28318530717958647692 * (fx * u + fy * v) +
                                                  phase + c * 0.7);
                    value = std::clamp(value, 0.0, 1.0);
                    img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(value * 255.0));
                }
            }
        }
        data.names.push_back("synthetic" + std::to_string(i));
        data.lr.push_back(bicubic_resize(img, size / scale, size / scale));
        data.hr.push_back(std::move(img));
    }
    return data;
}

namespace {

Tensor<float> crop_to_tensor(const ImageBuffer& img, int x0, int y0, int size) {
    Tensor<float> t(1, 3, size, size);
    for (int c = 0; c < 3; ++c) {
        float* plane = t.plane(0, c);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                plane[static_cast<std::int64_t>(y) * size + x] =
                    static_cast<float>(img.at(x0 + x, y0 + y, c)) / 255.0f;
            }
        }
    }
    return t;
}

} // namespace

Tensor<float> flip_horizontal(const Tensor<float>& t) {
    Tensor<float> out(t.shape());
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < t.h(); ++y) {
                for (int x = 0; x < t.w(); ++x) {
                    out.at(n, c, y, x) = t.at(n, c, y, t.w() - 1 - x);
                }
            }
        }
    }
    return out;
}

Tensor<float> flip_vertical(const Tensor<float>& t) {
    Tensor<float> out(t.shape());
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < t.h(); ++y) {
                for (int x = 0; x < t.w(); ++x) {
                    out.at(n, c, y, x) = t.at(n, c, t.h() - 1 - y, x);
                }
            }
        }
    }
    return out;
}

Tensor<float> rotate90(const Tensor<float>& t) {
    Tensor<float> out(t.n(), t.c(), t.w(), t.h());
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < t.h(); ++y) {
                for (int x = 0; x < t.w(); ++x) {
                    out.at(n, c, t.w() - 1 - x, y) = t.at(n, c, y, x);
                }
            }
        }
    }
    return out;
}

Tensor<float> rotate90_inverse(const Tensor<float>& t) {
    Tensor<float> out(t.n(), t.c(), t.w(), t.h());
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < t.h(); ++y) {
                for (int x = 0; x < t.w(); ++x) {
                    out.at(n, c, x, t.h() - 1 - y) = t.at(n, c, y, x);
                }
            }
        }
    }
    return out;
}

SamplePair sample_patch(const Dataset& data, std::size_t index, std::mt19937& rng,
                        bool augment) {
    require(index < data.size(), "sample_patch: image index out of range");
    const ImageBuffer& lr = data.lr[index];
    const ImageBuffer& hr = data.hr[index];
    const int s = data.scale;
    require(lr.width >= kPatchSize && lr.height >= kPatchSize,
            "sample_patch: image " + data.names[index] + " is smaller than a " +
                std::to_string(kPatchSize) + "px LR patch");

    std::uniform_int_distribution<int> dx(0, lr.width - kPatchSize);
    std::uniform_int_distribution<int> dy(0, lr.height - kPatchSize);

    SamplePair sample;
    sample.crop_x = dx(rng);
    sample.crop_y = dy(rng);
    sample.lr = crop_to_tensor(lr, sample.crop_x, sample.crop_y, kPatchSize);
    sample.hr = crop_to_tensor(hr, sample.crop_x * s, sample.crop_y * s, kPatchSize * s);

    if (augment) {
        std::bernoulli_distribution coin(0.5);
        sample.flip_h = coin(rng);
        sample.flip_v = coin(rng);
        sample.rot90 = coin(rng) ? 1 : 0;
        if (sample.flip_h) {
            sample.lr = flip_horizontal(sample.lr);
            sample.hr = flip_horizontal(sample.hr);
        }
        if (sample.flip_v) {
            sample.lr = flip_vertical(sample.lr);
            sample.hr = flip_vertical(sample.hr);
        }
        if (sample.rot90) {
            sample.lr = rotate90(sample.lr);
            sample.hr = rotate90(sample.hr);
        }
    }
    return sample;
}

SamplePair undo_augmentation(const SamplePair& sample) {
    SamplePair out = sample;
    if (out.rot90) {
        out.lr = rotate90_inverse(out.lr);
        out.hr = rotate90_inverse(out.hr);
        out.rot90 = 0;
    }
    if (out.flip_v) {
        out.lr = flip_vertical(out.lr);
        out.hr = flip_vertical(out.hr);
        out.flip_v = false;
    }
    if (out.flip_h) {
        out.lr = flip_horizontal(out.lr);
        out.hr = flip_horizontal(out.hr);
        out.flip_h = false;
    }
    return out;
}

} // namespace defian
