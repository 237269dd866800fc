// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "defian/image.hpp"
#include "defian/resample.hpp"

namespace defian {

inline constexpr int kPatchSize = 48;  // LR patch edge; HR patches are 48s

// An LR training patch with its aligned HR ground truth and the augmentation
// that was applied to both.
struct SamplePair {
    Tensor<float> lr;  // (1, 3, 48, 48)
    Tensor<float> hr;  // (1, 3, 48s, 48s)
    bool flip_h = false;
    bool flip_v = false;
    int rot90 = 0;  // quarter turns, 0 or 1
    int crop_x = 0;  // LR coordinates of the crop origin
    int crop_y = 0;
};

// HR images with matching bicubic (or user supplied) LR counterparts. HR
// images are cropped to a multiple of the scale so every LR pixel aligns.
struct Dataset {
    int scale = 2;
    std::vector<std::string> names;
    std::vector<ImageBuffer> hr;
    std::vector<ImageBuffer> lr;

    std::size_t size() const { return hr.size(); }
};

// Loads every *.png under hr_dir (sorted by filename). When lr_dir is empty
// the LR side is synthesized by bicubic downscaling; otherwise it must hold a
// file with the same stem for every HR image.
Dataset load_dataset(const std::string& hr_dir, const std::string& lr_dir, int scale);

// Procedural set for desk-scale runs: ramps, sinusoids, checker-like mixes.
Dataset synthetic_dataset(int count, int hr_size, int scale, unsigned seed);

// Uniform aligned crop from image `index` with each augmentation applied with
// probability 1/2 (rotation drawn uniformly from {0 deg, 90 deg}). The same
// transform hits the LR and HR sides.
SamplePair sample_patch(const Dataset& data, std::size_t index, std::mt19937& rng,
                        bool augment = true);

// Inverse of the recorded augmentation; recovers the unaugmented pair.
SamplePair undo_augmentation(const SamplePair& sample);

// Spatial transforms used by the augmentation (batch 1 tensors).
Tensor<float> flip_horizontal(const Tensor<float>& t);
Tensor<float> flip_vertical(const Tensor<float>& t);
Tensor<float> rotate90(const Tensor<float>& t);        // counter-clockwise
Tensor<float> rotate90_inverse(const Tensor<float>& t);

} // namespace defian
