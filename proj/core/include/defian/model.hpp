// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "defian/dac.hpp"
#include "defian/diendec.hpp"
#include "defian/layers.hpp"

namespace defian {

// Network hyperparameters. Presets:
//   defian_s: N=5,  M=10, C=32
//   defian_l: N=10, M=20, C=64
struct ModelConfig {
    int n_modules = 5;
    int n_blocks = 10;
    int channels = 32;
    int scale = 2;  // one of 2, 3, 4
    std::vector<int> mshf_scales = {3, 5, 7};
    bool enable_mshf = true;
    bool enable_diendec = true;
    bool enable_dac = true;
    // Training-set RGB mean in [0,1], subtracted on entry, added back on exit.
    std::array<float, 3> rgb_mean = {0.4488f, 0.4371f, 0.4040f};

    static ModelConfig defian_s(int scale);
    static ModelConfig defian_l(int scale);
    void validate() const;
    bool operator==(const ModelConfig& o) const;
};

// Channel attention bottleneck (RCAB) and DAC bottleneck.
inline constexpr int kChannelAttentionReduction = 16;
inline constexpr int kDacReduction = 16;

// Residual channel attention block: x + f_FE(x) * f_CA(f_FE(x)), where f_FE
// stacks two 3x3 convolutions with a ReLU between, and f_CA squeezes with a
// global pool, two FC layers and a sigmoid gate.
template <typename T>
struct Rcab {
    Conv2dLayer<T> conv1, conv2;
    LinearLayer<T> fc1, fc2;

    Rcab() = default;
    Rcab(int channels, std::mt19937& rng);
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Feature extraction module: a chain of M RCABs.
template <typename T>
struct Fem {
    std::vector<Rcab<T>> blocks;

    Fem() = default;
    Fem(int channels, int n_blocks, std::mt19937& rng);
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Multi-scale Hessian filtering block: per scale, three depthwise stencil
// layers produce the second-derivative maps, the closed-form maximum
// eigenvalue is taken per pixel, and the channel average forms one map. Maps
// are concatenated in scale order. The stencil taps are trainable and start
// at the exact second-derivative patterns.
template <typename T>
struct MshfBlock {
    std::vector<int> scales;
    std::vector<std::array<StencilLayer<T>, 3>> stencils;  // hh, vv, hv per scale

    MshfBlock() = default;
    MshfBlock(int channels, const std::vector<int>& scales);
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Test/ablation override for the attention gate of a module.
enum class AttentionForce {
    none,  // computed attention
    one,   // a == 1: module degenerates to x + FEM(x)
    zero,  // a == 0: module passes x through
};

// One detail-fidelity attention module:
//   x^ = FEM(x); lambda = MSHF(x^); v = DiEnDec(lambda);
//   a = sigmoid(DAC(v, x)); y = x + x^ * a
// Disabled components are bypassed: without MSHF the channel-averaged x^ is
// replicated to the eigenvalue channel count, without DiEnDec the eigenvalue
// maps are channel-averaged, without DAC v is broadcast across channels. With
// all three disabled the module is exactly x + FEM(x).
template <typename T>
struct DeFiAm {
    bool use_mshf = true, use_diendec = true, use_dac = true;
    int lambda_channels = 3;
    Fem<T> fem;
    MshfBlock<T> mshf;
    DiEnDec<T> diendec;
    Dac<T> dac;

    DeFiAm() = default;
    DeFiAm(const ModelConfig& cfg, std::mt19937& rng);
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& x,
                       AttentionForce force = AttentionForce::none) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& fn) const;
    std::int64_t macs(int h, int w) const;
};

// Full network: head conv, N DeFiAM modules, a trunk conv closed by a global
// skip from the head features, sub-pixel upsampler, tail conv. RGB mean is
// subtracted on entry and added back on exit.
template <typename T>
class DeFiANet {
public:
    explicit DeFiANet(const ModelConfig& cfg, unsigned seed = 0);

    // (n, 3, h, w) -> (n, 3, s*h, s*w)
    NodeRef<T> forward(Tape<T>& tape, const NodeRef<T>& lr,
                       AttentionForce force = AttentionForce::none) const;
    Tensor<T> infer(const Tensor<T>& lr) const;

    const ModelConfig& config() const { return cfg_; }
    void visit_params(const ParamVisitor<T>& fn) const;
    std::vector<NodeRef<T>> parameters() const;

    const std::vector<DeFiAm<T>>& modules() const { return modules_; }

    // Multiply-accumulate count over all convolution, transposed-convolution
    // and FC layers for synthesizing an HR image of the given size (the
    // network runs at hr/scale resolution in front of the upsampler).
    std::int64_t flops(int hr_width, int hr_height) const;

private:
    ModelConfig cfg_;
    Conv2dLayer<T> head_;
    std::vector<DeFiAm<T>> modules_;
    Conv2dLayer<T> trunk_;
    std::vector<Conv2dLayer<T>> up_convs_;
    std::vector<int> up_factors_;
    Conv2dLayer<T> tail_;
};

// Number of trainable scalars.
template <typename T>
std::int64_t count_params(const DeFiANet<T>& model);

template <typename T>
std::int64_t count_flops(const DeFiANet<T>& model, int hr_width = 480,
                         int hr_height = 360) {
    return model.flops(hr_width, hr_height);
}

extern template struct Rcab<float>;
extern template struct Rcab<double>;
extern template struct Fem<float>;
extern template struct Fem<double>;
extern template struct MshfBlock<float>;
extern template struct MshfBlock<double>;
extern template struct DeFiAm<float>;
extern template struct DeFiAm<double>;
extern template class DeFiANet<float>;
extern template class DeFiANet<double>;

} // namespace defian
