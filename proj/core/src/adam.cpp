// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/adam.hpp"

#include <cmath>

namespace defian {

template <typename T>
void AdamOptimizer<T>::step(const std::vector<NodeRef<T>>& params, T lr) {
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& p : params) {
            m_.emplace_back(p->value.shape());
            v_.emplace_back(p->value.shape());
        }
    }
    require(m_.size() == params.size(),
            "adam: parameter list size changed between steps");

    ++step_count_;
    const T c1 = T(1) - std::pow(beta1_, static_cast<T>(step_count_));
    const T c2 = T(1) - std::pow(beta2_, static_cast<T>(step_count_));

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        require(m_[k].shape() == p->value.shape(),
                "adam: parameter shape changed between steps");
        T* value = p->value.data();
        const T* grad = p->grad.data();
        T* m = m_[k].data();
        T* v = v_[k].data();
        for (std::int64_t i = 0; i < p->value.size(); ++i) {
            const T g = grad[i];
            m[i] = beta1_ * m[i] + (T(1) - beta1_) * g;
            v[i] = beta2_ * v[i] + (T(1) - beta2_) * g * g;
            const T m_hat = m[i] / c1;
            const T v_hat = v[i] / c2;
            value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

template <typename T>
void AdamOptimizer<T>::restore(std::vector<Tensor<T>> m, std::vector<Tensor<T>> v,
                               std::int64_t step_count) {
    require(m.size() == v.size(), "adam: mismatched moment lists");
    m_ = std::move(m);
    v_ = std::move(v);
    step_count_ = step_count;
}

template <typename T>
T clip_grad_norm(const std::vector<NodeRef<T>>& params, T max_norm) {
    double sq = 0;
    for (const auto& p : params) {
        const T* g = p->grad.data();
        for (std::int64_t i = 0; i < p->grad.size(); ++i) {
            sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
        }
    }
    const T norm = static_cast<T>(std::sqrt(sq));
    if (max_norm > T(0) && norm > max_norm) {
        const T scale = max_norm / norm;
        for (const auto& p : params) {
            T* g = p->grad.data();
            for (std::int64_t i = 0; i < p->grad.size(); ++i) g[i] *= scale;
        }
    }
    return norm;
}

template class AdamOptimizer<float>;
template class AdamOptimizer<double>;
template float clip_grad_norm(const std::vector<NodeRef<float>>&, float);
template double clip_grad_norm(const std::vector<NodeRef<double>>&, double);

} // namespace defian
