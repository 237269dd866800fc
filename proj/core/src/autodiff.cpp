// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/autodiff.hpp"

#include <cmath>
#include <string>

namespace defian {

namespace {

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                        a.shape().str() + " vs " + b.shape().str());
}

} // namespace

template <typename T>
void Tape<T>::backward(const NodeRef<T>& loss) {
    require(recording_, "backward: tape is not recording");
    require(loss->value.size() == 1,
            "backward: loss must be scalar, got shape " + loss->value.shape().str());
    loss->grad.fill(T(1));
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        (*it)();
    }
}

template <typename T>
NodeRef<T> Tape<T>::conv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                           const NodeRef<T>& bias, const ConvSpec& spec) {
    const Tensor<T>& in = x->value;
    require(in.c() == spec.in_channels,
            "conv2d: input has " + std::to_string(in.c()) + " channels, spec expects " +
                std::to_string(spec.in_channels));
    require(weight->value.shape() ==
                Shape{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel},
            "conv2d: weight shape " + weight->value.shape().str() + " does not match spec");
    require(!spec.has_bias || (bias && bias->value.size() == spec.out_channels),
            "conv2d: spec expects a bias of length " + std::to_string(spec.out_channels));
    const int ho = spec.out_extent(in.h());
    const int wo = spec.out_extent(in.w());
    require(ho >= 1 && wo >= 1, "conv2d: zero-sized spatial output for input " +
                                    in.shape().str());

    Tensor<T> out(in.n(), spec.out_channels, ho, wo);
    const T* b = spec.has_bias ? bias->value.data() : nullptr;
    conv2d_forward(in, weight->value, b, spec, out);

    bool needs = recording_ && (x->requires_grad || weight->requires_grad ||
                                (spec.has_bias && bias->requires_grad));
    auto node = make_node(std::move(out), needs);
    if (needs) {
        ConvSpec sp = spec;
        record([x, weight, bias, node, sp] {
            if (x->requires_grad) {
                conv2d_backward_input(node->grad, weight->value, sp, x->grad);
            }
            if (weight->requires_grad) {
                conv2d_backward_weight(node->grad, x->value, sp, weight->grad);
            }
            if (sp.has_bias && bias->requires_grad) {
                bias_backward(node->grad, bias->grad.data());
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::deconv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                             const NodeRef<T>& bias, const ConvSpec& spec) {
    const Tensor<T>& in = x->value;
    require(in.c() == spec.in_channels,
            "deconv2d: input has " + std::to_string(in.c()) + " channels, spec expects " +
                std::to_string(spec.in_channels));
    require(weight->value.shape() ==
                Shape{spec.in_channels, spec.out_channels, spec.kernel, spec.kernel},
            "deconv2d: weight shape " + weight->value.shape().str() + " does not match spec");
    require(!spec.has_bias || (bias && bias->value.size() == spec.out_channels),
            "deconv2d: spec expects a bias of length " + std::to_string(spec.out_channels));
    const int ho = spec.transposed_out_extent(in.h());
    const int wo = spec.transposed_out_extent(in.w());
    require(ho >= 1 && wo >= 1, "deconv2d: zero-sized spatial output for input " +
                                    in.shape().str());

    Tensor<T> out(in.n(), spec.out_channels, ho, wo);
    const T* b = spec.has_bias ? bias->value.data() : nullptr;
    deconv2d_forward(in, weight->value, b, spec, out);

    bool needs = recording_ && (x->requires_grad || weight->requires_grad ||
                                (spec.has_bias && bias->requires_grad));
    auto node = make_node(std::move(out), needs);
    if (needs) {
        ConvSpec sp = spec;
        record([x, weight, bias, node, sp] {
            if (x->requires_grad) {
                deconv2d_backward_input(node->grad, weight->value, sp, x->grad);
            }
            if (weight->requires_grad) {
                deconv2d_backward_weight(node->grad, x->value, sp, weight->grad);
            }
            if (sp.has_bias && bias->requires_grad) {
                bias_backward(node->grad, bias->grad.data());
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::depthwise_conv2d(const NodeRef<T>& x, const NodeRef<T>& weight,
                                     const NodeRef<T>& bias, int kernel, int dilation,
                                     int padding) {
    const Tensor<T>& in = x->value;
    require(weight->value.shape() == Shape{in.c(), 1, kernel, kernel},
            "depthwise_conv2d: weight shape " + weight->value.shape().str() +
                " does not match input channels " + std::to_string(in.c()));
    const int ho = in.h() + 2 * padding - dilation * (kernel - 1);
    const int wo = in.w() + 2 * padding - dilation * (kernel - 1);
    require(ho >= 1 && wo >= 1,
            "depthwise_conv2d: zero-sized spatial output for input " + in.shape().str());

    Tensor<T> out(in.n(), in.c(), ho, wo);
    const T* b = bias ? bias->value.data() : nullptr;
    depthwise_forward(in, weight->value, b, kernel, dilation, padding, out);

    bool needs = recording_ && (x->requires_grad || weight->requires_grad ||
                                (bias && bias->requires_grad));
    auto node = make_node(std::move(out), needs);
    if (needs) {
        record([x, weight, bias, node, kernel, dilation, padding] {
            if (x->requires_grad) {
                depthwise_backward_input(node->grad, weight->value, kernel, dilation,
                                         padding, x->grad);
            }
            if (weight->requires_grad) {
                depthwise_backward_weight(node->grad, x->value, kernel, dilation,
                                          padding, weight->grad);
            }
            if (bias && bias->requires_grad) {
                bias_backward(node->grad, bias->grad.data());
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::relu(const NodeRef<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) {
        out[i] = x->value[i] > T(0) ? x->value[i] : T(0);
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                if (x->value[i] > T(0)) x->grad[i] += node->grad[i];
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::sigmoid(const NodeRef<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) {
        out[i] = T(1) / (T(1) + std::exp(-x->value[i]));
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                const T y = node->value[i];
                x->grad[i] += node->grad[i] * y * (T(1) - y);
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::sqrt(const NodeRef<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) {
        out[i] = std::sqrt(x->value[i] > T(0) ? x->value[i] : T(0));
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                const T y = node->value[i];
                if (y > T(0)) x->grad[i] += node->grad[i] / (T(2) * y);
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::recip(const NodeRef<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) {
        out[i] = T(1) / x->value[i];
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                const T y = node->value[i];
                x->grad[i] -= node->grad[i] * y * y;
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::add(const NodeRef<T>& a, const NodeRef<T>& b) {
    check_same_shape(a->value, b->value, "add");
    Tensor<T> out(a->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
    auto node = make_node(std::move(out), track(a, b));
    if (node->requires_grad) {
        record([a, b, node] {
            if (a->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) a->grad[i] += node->grad[i];
            }
            if (b->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) b->grad[i] += node->grad[i];
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::sub(const NodeRef<T>& a, const NodeRef<T>& b) {
    check_same_shape(a->value, b->value, "sub");
    Tensor<T> out(a->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
    auto node = make_node(std::move(out), track(a, b));
    if (node->requires_grad) {
        record([a, b, node] {
            if (a->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) a->grad[i] += node->grad[i];
            }
            if (b->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) b->grad[i] -= node->grad[i];
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::mul(const NodeRef<T>& a, const NodeRef<T>& b) {
    check_same_shape(a->value, b->value, "mul");
    Tensor<T> out(a->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
    auto node = make_node(std::move(out), track(a, b));
    if (node->requires_grad) {
        record([a, b, node] {
            if (a->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                    a->grad[i] += node->grad[i] * b->value[i];
                }
            }
            if (b->requires_grad) {
                for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                    b->grad[i] += node->grad[i] * a->value[i];
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::add_scalar(const NodeRef<T>& x, T s) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x->value[i] + s;
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) x->grad[i] += node->grad[i];
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::mul_scalar(const NodeRef<T>& x, T s) {
    Tensor<T> out(x->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * s;
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node, s] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                x->grad[i] += node->grad[i] * s;
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::hessian_max_eig(const NodeRef<T>& ghh, const NodeRef<T>& gvv,
                                    const NodeRef<T>& ghv) {
    check_same_shape(ghh->value, gvv->value, "hessian_max_eig");
    check_same_shape(ghh->value, ghv->value, "hessian_max_eig");
    Tensor<T> out(ghh->value.shape());
    for (std::int64_t i = 0; i < out.size(); ++i) {
        const T a = ghh->value[i], d = gvv->value[i], b = ghv->value[i];
        const T half_diff = (a - d) / T(2);
        T rad = half_diff * half_diff + b * b;
        if (rad < T(0)) rad = T(0);  // absorbs float round-off
        out[i] = (a + d) / T(2) + std::sqrt(rad);
    }
    bool needs = recording_ && (ghh->requires_grad || gvv->requires_grad ||
                                ghv->requires_grad);
    auto node = make_node(std::move(out), needs);
    if (needs) {
        record([ghh, gvv, ghv, node] {
            for (std::int64_t i = 0; i < node->grad.size(); ++i) {
                const T g = node->grad[i];
                const T a = ghh->value[i], d = gvv->value[i], b = ghv->value[i];
                const T half_diff = (a - d) / T(2);
                T rad = half_diff * half_diff + b * b;
                if (rad < T(0)) rad = T(0);
                const T r = std::sqrt(rad);
                // Ratios are bounded by |half_diff| <= r and |b| <= r; the
                // subgradient at a repeated eigenvalue (r == 0) is (1/2, 1/2, 0).
                T da = T(0.5), dd = T(0.5), db = T(0);
                if (r > T(0)) {
                    const T t = half_diff / (T(2) * r);
                    da += t;
                    dd -= t;
                    db = b / r;
                }
                if (ghh->requires_grad) ghh->grad[i] += g * da;
                if (gvv->requires_grad) gvv->grad[i] += g * dd;
                if (ghv->requires_grad) ghv->grad[i] += g * db;
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::global_avg_pool(const NodeRef<T>& x) {
    const Tensor<T>& in = x->value;
    require(in.h() >= 1 && in.w() >= 1, "global_avg_pool: empty spatial extent");
    Tensor<T> out(in.n(), in.c(), 1, 1);
    const std::int64_t hw = static_cast<std::int64_t>(in.h()) * in.w();
    for (int n = 0; n < in.n(); ++n) {
        for (int c = 0; c < in.c(); ++c) {
            const T* p = in.plane(n, c);
            T acc = T(0);
            for (std::int64_t i = 0; i < hw; ++i) acc += p[i];
            out.at(n, c, 0, 0) = acc / static_cast<T>(hw);
        }
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node, hw] {
            for (int n = 0; n < x->value.n(); ++n) {
                for (int c = 0; c < x->value.c(); ++c) {
                    const T g = node->grad.at(n, c, 0, 0) / static_cast<T>(hw);
                    T* gp = x->grad.plane(n, c);
                    for (std::int64_t i = 0; i < hw; ++i) gp[i] += g;
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::spatial_mean(const NodeRef<T>& x) {
    return global_avg_pool(x);
}

template <typename T>
NodeRef<T> Tape<T>::linear(const NodeRef<T>& x, const NodeRef<T>& weight,
                           const NodeRef<T>& bias) {
    const Tensor<T>& in = x->value;
    require(in.h() == 1 && in.w() == 1,
            "linear: expects a flattened (n, c, 1, 1) input, got " + in.shape().str());
    const int cin = in.c();
    const int cout = weight->value.n();
    require(weight->value.shape() == Shape{cout, cin, 1, 1},
            "linear: weight shape " + weight->value.shape().str() + " does not match input " +
                in.shape().str());
    require(!bias || bias->value.size() == cout,
            "linear: bias length does not match output size " + std::to_string(cout));

    Tensor<T> out(in.n(), cout, 1, 1);
    for (int n = 0; n < in.n(); ++n) {
        const T* xv = in.plane(n, 0);
        for (int o = 0; o < cout; ++o) {
            const T* w = weight->value.plane(o, 0);
            T acc = bias ? bias->value[o] : T(0);
            for (int i = 0; i < cin; ++i) acc += w[i] * xv[i];
            out.at(n, o, 0, 0) = acc;
        }
    }
    bool needs = recording_ && (x->requires_grad || weight->requires_grad ||
                                (bias && bias->requires_grad));
    auto node = make_node(std::move(out), needs);
    if (needs) {
        record([x, weight, bias, node, cin, cout] {
            for (int n = 0; n < x->value.n(); ++n) {
                const T* xv = x->value.plane(n, 0);
                const T* gy = node->grad.plane(n, 0);
                for (int o = 0; o < cout; ++o) {
                    const T g = gy[o];
                    if (g == T(0)) continue;
                    const T* w = weight->value.plane(o, 0);
                    if (x->requires_grad) {
                        T* gx = x->grad.plane(n, 0);
                        for (int i = 0; i < cin; ++i) gx[i] += g * w[i];
                    }
                    if (weight->requires_grad) {
                        T* gw = weight->grad.plane(o, 0);
                        for (int i = 0; i < cin; ++i) gw[i] += g * xv[i];
                    }
                    if (bias && bias->requires_grad) bias->grad[o] += g;
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::mul_channel(const NodeRef<T>& x, const NodeRef<T>& s) {
    const Tensor<T>& in = x->value;
    require(s->value.shape() == Shape{in.n(), in.c(), 1, 1},
            "mul_channel: scale shape " + s->value.shape().str() + " does not match input " +
                in.shape().str());
    Tensor<T> out(in.shape());
    const std::int64_t hw = static_cast<std::int64_t>(in.h()) * in.w();
    for (int n = 0; n < in.n(); ++n) {
        for (int c = 0; c < in.c(); ++c) {
            const T f = s->value.at(n, c, 0, 0);
            const T* p = in.plane(n, c);
            T* q = out.plane(n, c);
            for (std::int64_t i = 0; i < hw; ++i) q[i] = p[i] * f;
        }
    }
    auto node = make_node(std::move(out), track(x, s));
    if (node->requires_grad) {
        record([x, s, node, hw] {
            for (int n = 0; n < x->value.n(); ++n) {
                for (int c = 0; c < x->value.c(); ++c) {
                    const T* g = node->grad.plane(n, c);
                    if (x->requires_grad) {
                        const T f = s->value.at(n, c, 0, 0);
                        T* gx = x->grad.plane(n, c);
                        for (std::int64_t i = 0; i < hw; ++i) gx[i] += g[i] * f;
                    }
                    if (s->requires_grad) {
                        const T* xv = x->value.plane(n, c);
                        T acc = T(0);
                        for (std::int64_t i = 0; i < hw; ++i) acc += g[i] * xv[i];
                        s->grad.at(n, c, 0, 0) += acc;
                    }
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::add_channel(const NodeRef<T>& x, const NodeRef<T>& s) {
    const Tensor<T>& in = x->value;
    require(s->value.shape() == Shape{in.n(), in.c(), 1, 1},
            "add_channel: shift shape " + s->value.shape().str() + " does not match input " +
                in.shape().str());
    Tensor<T> out(in.shape());
    const std::int64_t hw = static_cast<std::int64_t>(in.h()) * in.w();
    for (int n = 0; n < in.n(); ++n) {
        for (int c = 0; c < in.c(); ++c) {
            const T f = s->value.at(n, c, 0, 0);
            const T* p = in.plane(n, c);
            T* q = out.plane(n, c);
            for (std::int64_t i = 0; i < hw; ++i) q[i] = p[i] + f;
        }
    }
    auto node = make_node(std::move(out), track(x, s));
    if (node->requires_grad) {
        record([x, s, node, hw] {
            for (int n = 0; n < x->value.n(); ++n) {
                for (int c = 0; c < x->value.c(); ++c) {
                    const T* g = node->grad.plane(n, c);
                    if (x->requires_grad) {
                        T* gx = x->grad.plane(n, c);
                        for (std::int64_t i = 0; i < hw; ++i) gx[i] += g[i];
                    }
                    if (s->requires_grad) {
                        T acc = T(0);
                        for (std::int64_t i = 0; i < hw; ++i) acc += g[i];
                        s->grad.at(n, c, 0, 0) += acc;
                    }
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::broadcast_channel(const NodeRef<T>& x, int channels) {
    const Tensor<T>& in = x->value;
    require(in.c() == 1, "broadcast_channel: expects a single-channel input, got " +
                             in.shape().str());
    Tensor<T> out(in.n(), channels, in.h(), in.w());
    const std::int64_t hw = static_cast<std::int64_t>(in.h()) * in.w();
    for (int n = 0; n < in.n(); ++n) {
        const T* p = in.plane(n, 0);
        for (int c = 0; c < channels; ++c) {
            T* q = out.plane(n, c);
            for (std::int64_t i = 0; i < hw; ++i) q[i] = p[i];
        }
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node, channels, hw] {
            for (int n = 0; n < x->value.n(); ++n) {
                T* gx = x->grad.plane(n, 0);
                for (int c = 0; c < channels; ++c) {
                    const T* g = node->grad.plane(n, c);
                    for (std::int64_t i = 0; i < hw; ++i) gx[i] += g[i];
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::channel_mean(const NodeRef<T>& x) {
    const Tensor<T>& in = x->value;
    require(in.c() >= 1, "channel_mean: empty channel extent");
    Tensor<T> out(in.n(), 1, in.h(), in.w());
    const std::int64_t hw = static_cast<std::int64_t>(in.h()) * in.w();
    const T scale = T(1) / static_cast<T>(in.c());
    for (int n = 0; n < in.n(); ++n) {
        T* q = out.plane(n, 0);
        for (int c = 0; c < in.c(); ++c) {
            const T* p = in.plane(n, c);
            for (std::int64_t i = 0; i < hw; ++i) q[i] += p[i];
        }
        for (std::int64_t i = 0; i < hw; ++i) q[i] *= scale;
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node, hw, scale] {
            for (int n = 0; n < x->value.n(); ++n) {
                const T* g = node->grad.plane(n, 0);
                for (int c = 0; c < x->value.c(); ++c) {
                    T* gx = x->grad.plane(n, c);
                    for (std::int64_t i = 0; i < hw; ++i) gx[i] += g[i] * scale;
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::concat_channels(const std::vector<NodeRef<T>>& xs) {
    require(!xs.empty(), "concat_channels: empty input list");
    const Tensor<T>& first = xs.front()->value;
    int channels = 0;
    bool needs = false;
    for (const auto& x : xs) {
        require(x->value.n() == first.n() && x->value.h() == first.h() &&
                    x->value.w() == first.w(),
                "concat_channels: mismatched shapes " + first.shape().str() + " vs " +
                    x->value.shape().str());
        channels += x->value.c();
        needs = needs || x->requires_grad;
    }
    Tensor<T> out(first.n(), channels, first.h(), first.w());
    const std::int64_t hw = static_cast<std::int64_t>(first.h()) * first.w();
    for (int n = 0; n < first.n(); ++n) {
        int co = 0;
        for (const auto& x : xs) {
            for (int c = 0; c < x->value.c(); ++c, ++co) {
                const T* p = x->value.plane(n, c);
                T* q = out.plane(n, co);
                for (std::int64_t i = 0; i < hw; ++i) q[i] = p[i];
            }
        }
    }
    auto node = make_node(std::move(out), recording_ && needs);
    if (node->requires_grad) {
        auto parts = xs;
        record([parts, node, hw] {
            for (int n = 0; n < node->value.n(); ++n) {
                int co = 0;
                for (const auto& x : parts) {
                    for (int c = 0; c < x->value.c(); ++c, ++co) {
                        if (!x->requires_grad) continue;
                        const T* g = node->grad.plane(n, co);
                        T* gx = x->grad.plane(n, c);
                        for (std::int64_t i = 0; i < hw; ++i) gx[i] += g[i];
                    }
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::pixel_shuffle(const NodeRef<T>& x, int factor) {
    const Tensor<T>& in = x->value;
    require(factor >= 1, "pixel_shuffle: factor must be >= 1");
    require(in.c() % (factor * factor) == 0,
            "pixel_shuffle: " + std::to_string(in.c()) + " channels not divisible by " +
                std::to_string(factor * factor));
    const int co = in.c() / (factor * factor);
    Tensor<T> out(in.n(), co, in.h() * factor, in.w() * factor);
    for (int n = 0; n < in.n(); ++n) {
        for (int c = 0; c < co; ++c) {
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) {
                    const T* p = in.plane(n, c * factor * factor + dy * factor + dx);
                    for (int y = 0; y < in.h(); ++y) {
                        T* q = out.plane(n, c) +
                               static_cast<std::int64_t>(y * factor + dy) * out.w() + dx;
                        const T* row = p + static_cast<std::int64_t>(y) * in.w();
                        for (int xcol = 0; xcol < in.w(); ++xcol) {
                            q[static_cast<std::int64_t>(xcol) * factor] = row[xcol];
                        }
                    }
                }
            }
        }
    }
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node, factor, co] {
            const Tensor<T>& g = node->grad;
            for (int n = 0; n < x->value.n(); ++n) {
                for (int c = 0; c < co; ++c) {
                    for (int dy = 0; dy < factor; ++dy) {
                        for (int dx = 0; dx < factor; ++dx) {
                            T* gx = x->grad.plane(n, c * factor * factor + dy * factor + dx);
                            for (int y = 0; y < x->value.h(); ++y) {
                                const T* row = g.plane(n, c) +
                                               static_cast<std::int64_t>(y * factor + dy) * g.w() + dx;
                                T* grow = gx + static_cast<std::int64_t>(y) * x->value.w();
                                for (int xcol = 0; xcol < x->value.w(); ++xcol) {
                                    grow[xcol] += row[static_cast<std::int64_t>(xcol) * factor];
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::sum(const NodeRef<T>& x) {
    T acc = T(0);
    for (std::int64_t i = 0; i < x->value.size(); ++i) acc += x->value[i];
    Tensor<T> out(1, 1, 1, 1);
    out[0] = acc;
    auto node = make_node(std::move(out), track(x));
    if (node->requires_grad) {
        record([x, node] {
            const T g = node->grad[0];
            for (std::int64_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
        });
    }
    return node;
}

template <typename T>
NodeRef<T> Tape<T>::mean_abs_error(const NodeRef<T>& pred, const NodeRef<T>& target) {
    check_same_shape(pred->value, target->value, "mean_abs_error");
    const std::int64_t count = pred->value.size();
    require(count > 0, "mean_abs_error: empty tensors");
    T acc = T(0);
    for (std::int64_t i = 0; i < count; ++i) {
        acc += std::abs(pred->value[i] - target->value[i]);
    }
    Tensor<T> out(1, 1, 1, 1);
    out[0] = acc / static_cast<T>(count);
    auto node = make_node(std::move(out), track(pred, target));
    if (node->requires_grad) {
        record([pred, target, node, count] {
            const T g = node->grad[0] / static_cast<T>(count);
            for (std::int64_t i = 0; i < count; ++i) {
                const T d = pred->value[i] - target->value[i];
                // Sign subgradient, zero at exact ties.
                const T s = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
                if (pred->requires_grad) pred->grad[i] += g * s;
                if (target->requires_grad) target->grad[i] -= g * s;
            }
        });
    }
    return node;
}

template class Tape<float>;
template class Tape<double>;

} // namespace defian
