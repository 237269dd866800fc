// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "defian/layers.hpp"

namespace defian {

// Accumulated receptive field of a stack of `depth` k x k layers whose
// dilations grow as (k-1)^i: 1 + sum_{i=1..depth} (k-1)^i. For k = 3 this is
// 2^(depth+1) - 1.
std::int64_t arf(int kernel, int depth);

// Dilated encoder-decoder fusing the multi-scale eigenvalue maps into one
// full-resolution attention representation. Three 3x3 convolutions with
// dilations 1, 2, 4 (feature erosion), three transposed 3x3 convolutions with
// dilations 4, 2, 1 (feature dilation), ReLU after each, channel widths
// doubling inward (in -> 2in -> 4in -> 8in and back), then a linear 1x1 gate
// down to one channel. Every layer is size-preserving (padding = dilation).
template <typename T>
struct DiEnDec {
    int in_channels = 0;
    std::vector<Conv2dLayer<T>> encoder;    // 3 layers
    std::vector<Deconv2dLayer<T>> decoder;  // 3 layers
    Conv2dLayer<T> gate;                    // 1x1, -> 1 channel, no activation

    DiEnDec() = default;
    DiEnDec(int in_channels, std::mt19937& rng);

    // (n, in_channels, h, w) -> (n, 1, h, w)
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const;

    // Output of encoder layer `depth` (1..3) only; used by the receptive
    // field instrumentation.
    NodeRef<T> forward_encoder(Tape<T>& tape, const NodeRef<T>& x, int depth) const;

    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Input pixels (y, x) that influence the given output pixel of the first
// `encoder_depth` encoder layers, found by seeding a unit gradient at the
// output pixel and collecting non-zero input gradients. The probe reports the
// support actually active on `input`; run it on a positive input with
// positive weights to read off the full geometric window.
template <typename T>
std::vector<std::pair<int, int>> receptive_field_probe(const DiEnDec<T>& net,
                                                       int encoder_depth,
                                                       const Tensor<T>& input,
                                                       int out_y, int out_x);

extern template struct DiEnDec<float>;
extern template struct DiEnDec<double>;

} // namespace defian
