// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/layers.hpp"

#include <cmath>

namespace defian {

template <typename T>
void kaiming_uniform(Tensor<T>& t, int fan_in, std::mt19937& rng) {
    require(fan_in >= 1, "kaiming_uniform: fan_in must be >= 1");
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(dist(rng));
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(int in_channels, int out_channels, int kernel,
                            int dilation, int padding, bool has_bias,
                            std::mt19937& rng) {
    spec = ConvSpec{kernel, dilation, padding, in_channels, out_channels, has_bias};
    Tensor<T> w(out_channels, in_channels, kernel, kernel);
    kaiming_uniform(w, in_channels * kernel * kernel, rng);
    weight = make_node(std::move(w), true);
    if (has_bias) {
        bias = make_node(Tensor<T>(1, out_channels, 1, 1), true);
    }
}

template <typename T>
void Conv2dLayer<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    fn(prefix + ".weight", weight);
    if (bias) fn(prefix + ".bias", bias);
}

template <typename T>
std::int64_t Conv2dLayer<T>::macs(int h, int w) const {
    return static_cast<std::int64_t>(spec.kernel) * spec.kernel * spec.in_channels *
           spec.out_channels * h * w;
}

template <typename T>
Deconv2dLayer<T>::Deconv2dLayer(int in_channels, int out_channels, int kernel,
                                int dilation, int padding, bool has_bias,
                                std::mt19937& rng) {
    spec = ConvSpec{kernel, dilation, padding, in_channels, out_channels, has_bias};
    Tensor<T> w(in_channels, out_channels, kernel, kernel);
    kaiming_uniform(w, in_channels * kernel * kernel, rng);
    weight = make_node(std::move(w), true);
    if (has_bias) {
        bias = make_node(Tensor<T>(1, out_channels, 1, 1), true);
    }
}

template <typename T>
void Deconv2dLayer<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    fn(prefix + ".weight", weight);
    if (bias) fn(prefix + ".bias", bias);
}

template <typename T>
std::int64_t Deconv2dLayer<T>::macs(int h, int w) const {
    return static_cast<std::int64_t>(spec.kernel) * spec.kernel * spec.in_channels *
           spec.out_channels * h * w;
}

template <typename T>
StencilLayer<T>::StencilLayer(int channels_, int dilation_, Pattern pattern)
    : channels(channels_), dilation(dilation_) {
    Tensor<T> w(channels, 1, 3, 3);
    for (int c = 0; c < channels; ++c) {
        T* p = w.plane(c, 0);
        switch (pattern) {
            case Pattern::hh:
                p[3] = T(1); p[4] = T(-2); p[5] = T(1);
                break;
            case Pattern::vv:
                p[1] = T(1); p[4] = T(-2); p[7] = T(1);
                break;
            case Pattern::hv:
                p[0] = T(1); p[2] = T(-1); p[6] = T(-1); p[8] = T(1);
                break;
        }
    }
    weight = make_node(std::move(w), true);
    bias = make_node(Tensor<T>(1, channels, 1, 1), true);
}

template <typename T>
void StencilLayer<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    fn(prefix + ".weight", weight);
    fn(prefix + ".bias", bias);
}

template <typename T>
std::int64_t StencilLayer<T>::macs(int h, int w) const {
    return static_cast<std::int64_t>(9) * channels * h * w;
}

template <typename T>
LinearLayer<T>::LinearLayer(int in_features, int out_features, bool has_bias,
                            std::mt19937& rng) {
    Tensor<T> w(out_features, in_features, 1, 1);
    kaiming_uniform(w, in_features, rng);
    weight = make_node(std::move(w), true);
    if (has_bias) {
        bias = make_node(Tensor<T>(1, out_features, 1, 1), true);
    }
}

template <typename T>
void LinearLayer<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    fn(prefix + ".weight", weight);
    if (bias) fn(prefix + ".bias", bias);
}

template <typename T>
std::int64_t LinearLayer<T>::macs() const {
    return static_cast<std::int64_t>(weight->value.n()) * weight->value.c();
}

template void kaiming_uniform<float>(Tensor<float>&, int, std::mt19937&);
template void kaiming_uniform<double>(Tensor<double>&, int, std::mt19937&);
template struct Conv2dLayer<float>;
template struct Conv2dLayer<double>;
template struct Deconv2dLayer<float>;
template struct Deconv2dLayer<double>;
template struct StencilLayer<float>;
template struct StencilLayer<double>;
template struct LinearLayer<float>;
template struct LinearLayer<double>;

} // namespace defian
