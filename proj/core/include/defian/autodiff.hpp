// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "defian/conv_kernels.hpp"
#include "defian/tensor.hpp"

namespace defian {

// A tensor taking part in reverse-mode differentiation. `grad` has the same
// shape as `value` and accumulates during backward passes.
template <typename T>
struct DiffNode {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;

    DiffNode(Tensor<T> v, bool rg)
        : value(std::move(v)), grad(value.shape()), requires_grad(rg) {}

    void zero_grad() { grad.zero(); }
};

template <typename T>
using NodeRef = std::shared_ptr<DiffNode<T>>;

template <typename T>
NodeRef<T> make_node(Tensor<T> value, bool requires_grad = false) {
    return std::make_shared<DiffNode<T>>(std::move(value), requires_grad);
}

// Linear record of differentiable operations, rebuilt for every forward pass.
// Each op appends one backward closure; backward() seeds the scalar loss with
// gradient 1 and replays the record in reverse, so every node is visited
// exactly once and shared subexpressions accumulate into their parents.
//
// A non-recording tape executes forward math only; use it for inference so no
// closure (and no captured activation) outlives the call.
template <typename T>
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }
    std::size_t recorded_ops() const { return ops_.size(); }
    void clear() { ops_.clear(); }

    void backward(const NodeRef<T>& loss);

    // --- convolution family ---------------------------------------------
    NodeRef<T> conv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                      const NodeRef<T>& bias, const ConvSpec& spec);
    NodeRef<T> deconv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                        const NodeRef<T>& bias, const ConvSpec& spec);
    NodeRef<T> depthwise_conv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                                const NodeRef<T>& bias, int kernel, int dilation,
                                int padding);

    // --- elementwise ------------------------------------------------------
    NodeRef<T> relu(const NodeRef<T>& x);
    NodeRef<T> sigmoid(const NodeRef<T>& x);
    NodeRef<T> sqrt(const NodeRef<T>& x);
    NodeRef<T> recip(const NodeRef<T>& x);
    NodeRef<T> add(const NodeRef<T>& a, const NodeRef<T>& b);
    NodeRef<T> sub(const NodeRef<T>& a, const NodeRef<T>& b);
    NodeRef<T> mul(const NodeRef<T>& a, const NodeRef<T>& b);
    NodeRef<T> add_scalar(const NodeRef<T>& x, T s);
    NodeRef<T> mul_scalar(const NodeRef<T>& x, T s);

    // Closed-form maximum eigenvalue of the per-pixel symmetric 2x2 matrix
    // [[ghh, ghv], [ghv, gvv]]; fused so the backward stays finite where the
    // two eigenvalues coincide.
    NodeRef<T> hessian_max_eig(const NodeRef<T>& ghh, const NodeRef<T>& gvv,
                               const NodeRef<T>& ghv);

    // --- shape / broadcast ------------------------------------------------
    NodeRef<T> global_avg_pool(const NodeRef<T>& x);              // (n,c,h,w) -> (n,c,1,1)
    NodeRef<T> spatial_mean(const NodeRef<T>& x);                 // same reduction
    NodeRef<T> linear(const NodeRef<T>& x, const NodeRef<T>& weight,
                      const NodeRef<T>& bias);                    // (n,in,1,1) -> (n,out,1,1)
    NodeRef<T> mul_channel(const NodeRef<T>& x, const NodeRef<T>& s);  // s: (n,c,1,1)
    NodeRef<T> add_channel(const NodeRef<T>& x, const NodeRef<T>& s);  // s: (n,c,1,1)
    NodeRef<T> broadcast_channel(const NodeRef<T>& x, int channels);   // (n,1,h,w) -> (n,C,h,w)
    NodeRef<T> channel_mean(const NodeRef<T>& x);                 // (n,c,h,w) -> (n,1,h,w)
    NodeRef<T> concat_channels(const std::vector<NodeRef<T>>& xs);
    NodeRef<T> pixel_shuffle(const NodeRef<T>& x, int factor);

    // --- reductions / losses ----------------------------------------------
    NodeRef<T> sum(const NodeRef<T>& x);                          // -> (1,1,1,1)
    NodeRef<T> mean_abs_error(const NodeRef<T>& pred, const NodeRef<T>& target);

private:
    void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }
    bool track(const NodeRef<T>& a) const { return recording_ && a->requires_grad; }
    bool track(const NodeRef<T>& a, const NodeRef<T>& b) const {
        return recording_ && (a->requires_grad || b->requires_grad);
    }

    bool recording_;
    std::vector<std::function<void()>> ops_;
};

extern template class Tape<float>;
extern template class Tape<double>;

} // namespace defian
