// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defian/tensor.hpp"

namespace defian {

// Geometry of a stride-1 dilated convolution. Output spatial size is
// h + 2*pad - dilation*(k-1); the size-preserving choice is pad = dilation*(k-1)/2
// for odd k. Cross-correlation convention: no kernel flip.
struct ConvSpec {
    int kernel = 3;
    int dilation = 1;
    int padding = 0;
    int in_channels = 0;
    int out_channels = 0;
    bool has_bias = true;

    int out_extent(int in_extent) const {
        return in_extent + 2 * padding - dilation * (kernel - 1);
    }
    // Transposed map: recovers the conv input extent from the conv output extent.
    int transposed_out_extent(int in_extent) const {
        return in_extent - 2 * padding + dilation * (kernel - 1);
    }
};

inline int size_preserving_padding(int kernel, int dilation) {
    return dilation * (kernel - 1) / 2;
}

// dst[y][x] += weight * src[y + oy][x + ox] over the intersection of the two
// planes. Shared inner kernel of every convolution path here.
template <typename T>
void plane_axpy(T* dst, int dh, int dw, const T* src, int sh, int sw,
                T weight, int oy, int ox);

// Sum of a[y][x] * b[y + oy][x + ox] over the intersection.
template <typename T>
T plane_dot(const T* a, int ah, int aw, const T* b, int bh, int bw, int oy, int ox);

// Dense conv / transposed conv. Weight layouts:
//   conv2d:   (out_channels, in_channels, k, k), input channels = in_channels
//   deconv2d: (in_channels, out_channels, k, k), input channels = in_channels
// deconv2d is the exact adjoint of conv2d for a matched spec, so a conv weight
// tensor can be reused unchanged by the paired transposed map.
template <typename T>
void conv2d_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                    const ConvSpec& spec, Tensor<T>& out);
template <typename T>
void conv2d_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                           const ConvSpec& spec, Tensor<T>& gin);
template <typename T>
void conv2d_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                            const ConvSpec& spec, Tensor<T>& gweight);

template <typename T>
void deconv2d_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                      const ConvSpec& spec, Tensor<T>& out);
template <typename T>
void deconv2d_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                             const ConvSpec& spec, Tensor<T>& gin);
template <typename T>
void deconv2d_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                              const ConvSpec& spec, Tensor<T>& gweight);

// Depthwise (per-channel) convolution, weight (C, 1, k, k), one group per channel.
template <typename T>
void depthwise_forward(const Tensor<T>& in, const Tensor<T>& weight, const T* bias,
                       int kernel, int dilation, int padding, Tensor<T>& out);
template <typename T>
void depthwise_backward_input(const Tensor<T>& gout, const Tensor<T>& weight,
                              int kernel, int dilation, int padding, Tensor<T>& gin);
template <typename T>
void depthwise_backward_weight(const Tensor<T>& gout, const Tensor<T>& in,
                               int kernel, int dilation, int padding, Tensor<T>& gweight);

// Accumulates the per-output-channel sum of gout into gbias (length = gout.c()).
template <typename T>
void bias_backward(const Tensor<T>& gout, T* gbias);

} // namespace defian
