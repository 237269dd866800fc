// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/dac.hpp"

#include <algorithm>

namespace defian {

template <typename T>
std::pair<NodeRef<T>, NodeRef<T>> channel_stats(Tape<T>& tape, const NodeRef<T>& x,
                                                T eps) {
    auto mean = tape.spatial_mean(x);
    auto centered = tape.add_channel(x, tape.mul_scalar(mean, T(-1)));
    auto var = tape.spatial_mean(tape.mul(centered, centered));
    auto sd = tape.sqrt(tape.add_scalar(var, eps));
    return {mean, sd};
}

template <typename T>
NodeRef<T> normalize_observed(Tape<T>& tape, const NodeRef<T>& v, T eps) {
    auto mean = tape.spatial_mean(v);
    auto centered = tape.add_channel(v, tape.mul_scalar(mean, T(-1)));
    auto var = tape.spatial_mean(tape.mul(centered, centered));
    auto inv_sd = tape.recip(tape.sqrt(tape.add_scalar(var, eps)));
    return tape.mul_channel(centered, inv_sd);
}

template <typename T>
Dac<T>::Dac(int channels_, int reduction, T eps_, std::mt19937& rng)
    : channels(channels_), eps(eps_) {
    require(channels >= 1, "dac: channels must be >= 1");
    require(reduction >= 1, "dac: reduction must be >= 1");
    const int hidden = std::max(1, channels / reduction);
    mean_fc1 = LinearLayer<T>(channels, hidden, false, rng);
    mean_fc2 = LinearLayer<T>(hidden, channels, false, rng);
    std_fc1 = LinearLayer<T>(channels, hidden, false, rng);
    std_fc2 = LinearLayer<T>(hidden, channels, false, rng);
}

template <typename T>
NodeRef<T> Dac<T>::transform_mean(Tape<T>& tape, const NodeRef<T>& mu) const {
    return mean_fc2.forward(tape, tape.relu(mean_fc1.forward(tape, mu)));
}

template <typename T>
NodeRef<T> Dac<T>::transform_std(Tape<T>& tape, const NodeRef<T>& sigma) const {
    return std_fc2.forward(tape, tape.relu(std_fc1.forward(tape, sigma)));
}

template <typename T>
NodeRef<T> Dac<T>::forward(Tape<T>& tape, const NodeRef<T>& v,
                           const NodeRef<T>& x_ref) const {
    require(v->value.c() == 1,
            "dac: observed feature must be single-channel, got " + v->value.shape().str());
    require(x_ref->value.c() == channels,
            "dac: reference has " + std::to_string(x_ref->value.c()) +
                " channels, cell built for " + std::to_string(channels));
    require(v->value.n() == x_ref->value.n() && v->value.h() == x_ref->value.h() &&
                v->value.w() == x_ref->value.w(),
            "dac: observed " + v->value.shape().str() + " and reference " +
                x_ref->value.shape().str() + " do not align");

    auto normalized = normalize_observed(tape, v, eps);
    auto [mu_r, sd_r] = channel_stats(tape, x_ref, eps);
    auto mu_hat = transform_mean(tape, mu_r);
    auto sd_hat = transform_std(tape, sd_r);

    auto expanded = tape.broadcast_channel(normalized, channels);
    return tape.add_channel(tape.mul_channel(expanded, sd_hat), mu_hat);
}

template <typename T>
void Dac<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    mean_fc1.visit(prefix + ".mean_fc1", fn);
    mean_fc2.visit(prefix + ".mean_fc2", fn);
    std_fc1.visit(prefix + ".std_fc1", fn);
    std_fc2.visit(prefix + ".std_fc2", fn);
}

template <typename T>
std::int64_t Dac<T>::macs() const {
    return mean_fc1.macs() + mean_fc2.macs() + std_fc1.macs() + std_fc2.macs();
}

template struct Dac<float>;
template struct Dac<double>;
template NodeRef<float> normalize_observed(Tape<float>&, const NodeRef<float>&, float);
template NodeRef<double> normalize_observed(Tape<double>&, const NodeRef<double>&, double);
template std::pair<NodeRef<float>, NodeRef<float>> channel_stats(Tape<float>&,
                                                                 const NodeRef<float>&,
                                                                 float);
template std::pair<NodeRef<double>, NodeRef<double>> channel_stats(Tape<double>&,
                                                                   const NodeRef<double>&,
                                                                   double);

} // namespace defian
