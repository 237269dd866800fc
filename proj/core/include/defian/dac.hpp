// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defian/layers.hpp"

namespace defian {

// Distribution alignment cell. The one-channel attention representation v is
// standardized over its spatial extent per batch element, replicated to C
// channels, and re-scaled per channel with a learned transform of the
// reference feature statistics:
//   v~     = (v - mu_o) / sqrt(sigma_o^2 + eps)
//   mu^_r  = FC(ReLU(FC(mu_r)))      sigma^_r = FC(ReLU(FC(sigma_r)))
//   out_c  = v~ * sigma^_r[c] + mu^_r[c]
// Statistics are instance statistics (per batch element), so inference never
// depends on batch composition. The affine stacks are bias-free with a
// bottleneck of max(1, C/reduction).
template <typename T>
struct Dac {
    int channels = 0;
    T eps = T(1e-5);
    LinearLayer<T> mean_fc1, mean_fc2;
    LinearLayer<T> std_fc1, std_fc2;

    Dac() = default;
    Dac(int channels, int reduction, T eps, std::mt19937& rng);

    // v: (n, 1, h, w), x_ref: (n, C, h, w) -> (n, C, h, w)
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& v, const NodeRef<T>& x_ref) const;

    // The learned transforms alone, for inspecting mu^_r / sigma^_r.
    NodeRef<T> transform_mean(Tape<T>& tape, const NodeRef<T>& mu) const;
    NodeRef<T> transform_std(Tape<T>& tape, const NodeRef<T>& sigma) const;

    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs() const;
};

// Per-batch-element spatial standardization of a single-channel map,
// (v - mean) / sqrt(var + eps).
template <typename T>
NodeRef<T> normalize_observed(Tape<T>& tape, const NodeRef<T>& v, T eps);

// Spatial mean and sqrt(var + eps) per (n, c), each (n, C, 1, 1).
template <typename T>
std::pair<NodeRef<T>, NodeRef<T>> channel_stats(Tape<T>& tape, const NodeRef<T>& x,
                                                T eps);

extern template struct Dac<float>;
extern template struct Dac<double>;

} // namespace defian
