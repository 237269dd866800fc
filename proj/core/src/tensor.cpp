// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/tensor.hpp"

#include <cmath>

namespace defian {

std::string Shape::str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
           std::to_string(h) + ", " + std::to_string(w) + ")";
}

template <typename T>
std::int64_t first_non_finite(const Tensor<T>& t) {
    const T* p = t.data();
    for (std::int64_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(p[i])) return i;
    }
    return -1;
}

template class Tensor<float>;
template class Tensor<double>;
template std::int64_t first_non_finite(const Tensor<float>&);
template std::int64_t first_non_finite(const Tensor<double>&);

} // namespace defian
