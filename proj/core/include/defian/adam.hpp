// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "defian/autodiff.hpp"

namespace defian {

// Adam with bias correction. Moment buffers are keyed by parameter position,
// so the parameter list passed to step() must stay in a fixed order across
// the run (checkpointing relies on the same ordering).
template <typename T>
class AdamOptimizer {
public:
    AdamOptimizer(T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<NodeRef<T>>& params, T lr);
    void zero_grad(const std::vector<NodeRef<T>>& params) const {
        for (const auto& p : params) p->zero_grad();
    }

    std::int64_t step_count() const { return step_count_; }
    T beta1() const { return beta1_; }
    T beta2() const { return beta2_; }
    T eps() const { return eps_; }

    // Checkpoint access: first/second moment per parameter, same order as the
    // parameter list given to step().
    std::vector<Tensor<T>>& first_moments() { return m_; }
    std::vector<Tensor<T>>& second_moments() { return v_; }
    const std::vector<Tensor<T>>& first_moments() const { return m_; }
    const std::vector<Tensor<T>>& second_moments() const { return v_; }
    void restore(std::vector<Tensor<T>> m, std::vector<Tensor<T>> v,
                 std::int64_t step_count);

private:
    T beta1_, beta2_, eps_;
    std::int64_t step_count_ = 0;
    std::vector<Tensor<T>> m_;
    std::vector<Tensor<T>> v_;
};

// Scales all gradients so their joint L2 norm does not exceed max_norm.
// Returns the pre-clip norm. No-op (returns the norm) when max_norm <= 0.
template <typename T>
T clip_grad_norm(const std::vector<NodeRef<T>>& params, T max_norm);

extern template class AdamOptimizer<float>;
extern template class AdamOptimizer<double>;

} // namespace defian
