// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <random>
#include <string>

#include "defian/autodiff.hpp"

namespace defian {

// Callback receiving every trainable tensor of a block as (name, node).
// Traversal order is deterministic and is the contract for the optimizer
// state and the checkpoint layout.
template <typename T>
using ParamVisitor = std::function<void(const std::string&, const NodeRef<T>&)>;

// Kaiming fan-in scaled uniform fill: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T>
void kaiming_uniform(Tensor<T>& t, int fan_in, std::mt19937& rng);

// 2-D convolution layer owning its weight (out, in, k, k) and optional bias.
template <typename T>
struct Conv2dLayer {
    ConvSpec spec;
    NodeRef<T> weight;
    NodeRef<T> bias;  // null when spec.has_bias is false

    Conv2dLayer() = default;
    Conv2dLayer(int in_channels, int out_channels, int kernel, int dilation,
                int padding, bool has_bias, std::mt19937& rng);

    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const {
        return tape.conv2d(x, weight, bias, spec);
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;  // multiply-accumulates at h x w output
};

// Transposed convolution layer, weight (in, out, k, k).
template <typename T>
struct Deconv2dLayer {
    ConvSpec spec;
    NodeRef<T> weight;
    NodeRef<T> bias;

    Deconv2dLayer() = default;
    Deconv2dLayer(int in_channels, int out_channels, int kernel, int dilation,
                  int padding, bool has_bias, std::mt19937& rng);

    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const {
        return tape.deconv2d(x, weight, bias, spec);
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Depthwise 3x3 layer whose taps start out as one of the Hessian stencils and
// stay trainable; the dilation stretches the 3x3 pattern to scale ker =
// 2*dilation + 1. Bias starts at zero.
template <typename T>
struct StencilLayer {
    enum class Pattern { hh, vv, hv };

    int channels = 0;
    int dilation = 1;
    NodeRef<T> weight;  // (C, 1, 3, 3)
    NodeRef<T> bias;    // (1, C, 1, 1)

    StencilLayer() = default;
    StencilLayer(int channels, int dilation, Pattern pattern);

    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const {
        return tape.depthwise_conv2d(x, weight, bias, 3, dilation, dilation);
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Fully connected layer on (n, in, 1, 1) vectors, weight (out, in, 1, 1).
template <typename T>
struct LinearLayer {
    NodeRef<T> weight;
    NodeRef<T> bias;  // null when constructed without bias

    LinearLayer() = default;
    LinearLayer(int in_features, int out_features, bool has_bias, std::mt19937& rng);

    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const {
        return tape.linear(x, weight, bias);
    }
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs() const;
    int in_features() const { return weight->value.c(); }
    int out_features() const { return weight->value.n(); }
};

extern template struct Conv2dLayer<float>;
extern template struct Conv2dLayer<double>;
extern template struct Deconv2dLayer<float>;
extern template struct Deconv2dLayer<double>;
extern template struct StencilLayer<float>;
extern template struct StencilLayer<double>;
extern template struct LinearLayer<float>;
extern template struct LinearLayer<double>;

} // namespace defian
