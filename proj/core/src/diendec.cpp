// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/diendec.hpp"

#include <cmath>

namespace defian {

std::int64_t arf(int kernel, int depth) {
    require(kernel >= 3 && kernel % 2 == 1, "arf: kernel must be odd and >= 3");
    require(depth >= 0, "arf: depth must be >= 0");
    std::int64_t field = 1;
    std::int64_t term = 1;
    for (int i = 1; i <= depth; ++i) {
        term *= kernel - 1;
        field += term;
    }
    return field;
}

template <typename T>
DiEnDec<T>::DiEnDec(int in_channels_, std::mt19937& rng) : in_channels(in_channels_) {
    require(in_channels >= 1, "diendec: in_channels must be >= 1");
    const int c1 = in_channels * 2;
    const int c2 = in_channels * 4;
    const int c3 = in_channels * 8;
    encoder.emplace_back(in_channels, c1, 3, 1, 1, true, rng);
    encoder.emplace_back(c1, c2, 3, 2, 2, true, rng);
    encoder.emplace_back(c2, c3, 3, 4, 4, true, rng);
    decoder.emplace_back(c3, c2, 3, 4, 4, true, rng);
    decoder.emplace_back(c2, c1, 3, 2, 2, true, rng);
    decoder.emplace_back(c1, in_channels, 3, 1, 1, true, rng);
    gate = Conv2dLayer<T>(in_channels, 1, 1, 1, 0, true, rng);
}

template <typename T>
NodeRef<T> DiEnDec<T>::forward(Tape<T>& tape, const NodeRef<T>& x) const {
    require(x->value.c() == in_channels,
            "diendec: expected " + std::to_string(in_channels) + " input channels, got " +
                std::to_string(x->value.c()));
    NodeRef<T> t = x;
    for (const auto& layer : encoder) {
        t = tape.relu(layer.forward(tape, t));
    }
    for (const auto& layer : decoder) {
        t = tape.relu(layer.forward(tape, t));
    }
    return gate.forward(tape, t);
}

template <typename T>
NodeRef<T> DiEnDec<T>::forward_encoder(Tape<T>& tape, const NodeRef<T>& x,
                                       int depth) const {
    require(depth >= 1 && depth <= static_cast<int>(encoder.size()),
            "diendec: encoder depth out of range");
    NodeRef<T> t = x;
    for (int i = 0; i < depth; ++i) {
        t = tape.relu(encoder[static_cast<std::size_t>(i)].forward(tape, t));
    }
    return t;
}

template <typename T>
void DiEnDec<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    for (std::size_t i = 0; i < encoder.size(); ++i) {
        encoder[i].visit(prefix + ".enc" + std::to_string(i), fn);
    }
    for (std::size_t i = 0; i < decoder.size(); ++i) {
        decoder[i].visit(prefix + ".dec" + std::to_string(i), fn);
    }
    gate.visit(prefix + ".gate", fn);
}

template <typename T>
std::int64_t DiEnDec<T>::macs(int h, int w) const {
    std::int64_t total = 0;
    for (const auto& layer : encoder) total += layer.macs(h, w);
    for (const auto& layer : decoder) total += layer.macs(h, w);
    total += gate.macs(h, w);
    return total;
}

template <typename T>
std::vector<std::pair<int, int>> receptive_field_probe(const DiEnDec<T>& net,
                                                       int encoder_depth,
                                                       const Tensor<T>& input,
                                                       int out_y, int out_x) {
    require(input.n() == 1 && input.c() == net.in_channels,
            "receptive_field_probe: input shape " + input.shape().str() +
                " does not match the network");
    require(out_y >= 0 && out_y < input.h() && out_x >= 0 && out_x < input.w(),
            "receptive_field_probe: output pixel outside the plane");
    Tape<T> tape;
    auto x = make_node(input, true);
    auto out = net.forward_encoder(tape, x, encoder_depth);

    // Gradient of the channel sum at (out_y, out_x) only: multiply by a mask
    // that picks the pixel, then reduce.
    Tensor<T> mask(out->value.shape());
    for (int c = 0; c < out->value.c(); ++c) {
        mask.at(0, c, out_y, out_x) = T(1);
    }
    auto probe = tape.sum(tape.mul(out, make_node(std::move(mask), false)));
    tape.backward(probe);

    std::vector<std::pair<int, int>> support;
    for (int y = 0; y < input.h(); ++y) {
        for (int xcol = 0; xcol < input.w(); ++xcol) {
            bool hit = false;
            for (int c = 0; c < net.in_channels && !hit; ++c) {
                hit = x->grad.at(0, c, y, xcol) != T(0);
            }
            if (hit) support.emplace_back(y, xcol);
        }
    }
    return support;
}

template struct DiEnDec<float>;
template struct DiEnDec<double>;
template std::vector<std::pair<int, int>> receptive_field_probe(
    const DiEnDec<float>&, int, const Tensor<float>&, int, int);
template std::vector<std::pair<int, int>> receptive_field_probe(
    const DiEnDec<double>&, int, const Tensor<double>&, int, int);

} // namespace defian
