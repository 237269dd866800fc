// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "defian/check.hpp"

namespace defian {

// Dense 4-D shape in (batch, channel, height, width) order.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::int64_t elems() const {
        return static_cast<std::int64_t>(n) * c * h * w;
    }
    bool operator==(const Shape& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }
    std::string str() const;
};

// Dense 4-D tensor, row-major (n, c, h, w). Values are owned; copies are deep.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape s) : shape_(s), data_(check_size(s), T(0)) {}
    Tensor(int n, int c, int h, int w) : Tensor(Shape{n, c, h, w}) {}
    Tensor(Shape s, std::vector<T> values) : shape_(s), data_(std::move(values)) {
        require(static_cast<std::int64_t>(data_.size()) == s.elems(),
                "tensor data length " + std::to_string(data_.size()) +
                    " does not match shape " + s.str());
    }
    Tensor(Shape s, std::initializer_list<T> values)
        : Tensor(s, std::vector<T>(values)) {}

    static Tensor full(Shape s, T value) {
        Tensor t(s);
        t.fill(value);
        return t;
    }

    const Shape& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int c() const { return shape_.c; }
    int h() const { return shape_.h; }
    int w() const { return shape_.w; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::int64_t i) { return data_[i]; }
    const T& operator[](std::int64_t i) const { return data_[i]; }

    T& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
    const T& at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

    std::int64_t index(int n, int c, int y, int x) const {
        return ((static_cast<std::int64_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }

    // Pointer to the (n, c) spatial plane.
    T* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
    const T* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

    void fill(T value) {
        for (auto& v : data_) v = value;
    }
    void zero() { fill(T(0)); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (std::int64_t i = 0; i < size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

private:
    static std::int64_t check_size(Shape s) {
        require(s.n >= 0 && s.c >= 0 && s.h >= 0 && s.w >= 0,
                "negative tensor dimension in " + s.str());
        return s.elems();
    }

    Shape shape_{};
    std::vector<T> data_;
};

// Index of the first non-finite element, or -1 when all values are finite.
template <typename T>
std::int64_t first_non_finite(const Tensor<T>& t);

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace defian
