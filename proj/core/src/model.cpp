// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/model.hpp"

#include <algorithm>
#include <string>

namespace defian {

ModelConfig ModelConfig::defian_s(int scale) {
    ModelConfig cfg;
    cfg.n_modules = 5;
    cfg.n_blocks = 10;
    cfg.channels = 32;
    cfg.scale = scale;
    return cfg;
}

ModelConfig ModelConfig::defian_l(int scale) {
    ModelConfig cfg;
    cfg.n_modules = 10;
    cfg.n_blocks = 20;
    cfg.channels = 64;
    cfg.scale = scale;
    return cfg;
}

void ModelConfig::validate() const {
    require(n_modules >= 1, "config: n_modules must be >= 1");
    require(n_blocks >= 0, "config: n_blocks must be >= 0");
    require(channels >= 1, "config: channels must be >= 1");
    require(scale == 2 || scale == 3 || scale == 4,
            "config: scale must be 2, 3 or 4, got " + std::to_string(scale));
    require(!mshf_scales.empty(), "config: mshf_scales must not be empty");
    for (int k : mshf_scales) {
        require(k == 3 || k == 5 || k == 7,
                "config: unsupported mshf scale " + std::to_string(k));
    }
}

bool ModelConfig::operator==(const ModelConfig& o) const {
    return n_modules == o.n_modules && n_blocks == o.n_blocks && channels == o.channels &&
           scale == o.scale && mshf_scales == o.mshf_scales && enable_mshf == o.enable_mshf &&
           enable_diendec == o.enable_diendec && enable_dac == o.enable_dac &&
           rgb_mean == o.rgb_mean;
}

template <typename T>
Rcab<T>::Rcab(int channels, std::mt19937& rng) {
    conv1 = Conv2dLayer<T>(channels, channels, 3, 1, 1, true, rng);
    conv2 = Conv2dLayer<T>(channels, channels, 3, 1, 1, true, rng);
    const int hidden = std::max(1, channels / kChannelAttentionReduction);
    fc1 = LinearLayer<T>(channels, hidden, true, rng);
    fc2 = LinearLayer<T>(hidden, channels, true, rng);
}

template <typename T>
NodeRef<T> Rcab<T>::forward(Tape<T>& tape, const NodeRef<T>& x) const {
    require(x->value.c() == conv1.spec.in_channels,
            "rcab: expected " + std::to_string(conv1.spec.in_channels) +
                " channels, got " + std::to_string(x->value.c()));
    auto features = conv2.forward(tape, tape.relu(conv1.forward(tape, x)));
    auto pooled = tape.global_avg_pool(features);
    auto gate = tape.sigmoid(fc2.forward(tape, tape.relu(fc1.forward(tape, pooled))));
    return tape.add(x, tape.mul_channel(features, gate));
}

template <typename T>
void Rcab<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    conv1.visit(prefix + ".conv1", fn);
    conv2.visit(prefix + ".conv2", fn);
    fc1.visit(prefix + ".fc1", fn);
    fc2.visit(prefix + ".fc2", fn);
}

template <typename T>
std::int64_t Rcab<T>::macs(int h, int w) const {
    return conv1.macs(h, w) + conv2.macs(h, w) + fc1.macs() + fc2.macs();
}

template <typename T>
Fem<T>::Fem(int channels, int n_blocks, std::mt19937& rng) {
    blocks.reserve(static_cast<std::size_t>(n_blocks));
    for (int i = 0; i < n_blocks; ++i) blocks.emplace_back(channels, rng);
}

template <typename T>
NodeRef<T> Fem<T>::forward(Tape<T>& tape, const NodeRef<T>& x) const {
    NodeRef<T> t = x;
    for (const auto& block : blocks) t = block.forward(tape, t);
    return t;
}

template <typename T>
void Fem<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        blocks[i].visit(prefix + ".block" + std::to_string(i), fn);
    }
}

template <typename T>
std::int64_t Fem<T>::macs(int h, int w) const {
    std::int64_t total = 0;
    for (const auto& block : blocks) total += block.macs(h, w);
    return total;
}

template <typename T>
MshfBlock<T>::MshfBlock(int channels, const std::vector<int>& scales_) : scales(scales_) {
    require(!scales.empty(), "mshf: empty scale list");
    for (int ker : scales) {
        require(ker == 3 || ker == 5 || ker == 7,
                "mshf: unsupported scale " + std::to_string(ker));
        const int dilation = (ker - 1) / 2;
        stencils.push_back({StencilLayer<T>(channels, dilation, StencilLayer<T>::Pattern::hh),
                            StencilLayer<T>(channels, dilation, StencilLayer<T>::Pattern::vv),
                            StencilLayer<T>(channels, dilation, StencilLayer<T>::Pattern::hv)});
    }
}

template <typename T>
NodeRef<T> MshfBlock<T>::forward(Tape<T>& tape, const NodeRef<T>& x) const {
    std::vector<NodeRef<T>> maps;
    maps.reserve(stencils.size());
    for (const auto& set : stencils) {
        auto g_hh = set[0].forward(tape, x);
        auto g_vv = set[1].forward(tape, x);
        auto g_hv = set[2].forward(tape, x);
        maps.push_back(tape.channel_mean(tape.hessian_max_eig(g_hh, g_vv, g_hv)));
    }
    return maps.size() == 1 ? maps.front() : tape.concat_channels(maps);
}

template <typename T>
void MshfBlock<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    static const char* kDir[] = {"hh", "vv", "hv"};
    for (std::size_t s = 0; s < stencils.size(); ++s) {
        for (int d = 0; d < 3; ++d) {
            stencils[s][static_cast<std::size_t>(d)].visit(
                prefix + ".k" + std::to_string(scales[s]) + "." + kDir[d], fn);
        }
    }
}

template <typename T>
std::int64_t MshfBlock<T>::macs(int h, int w) const {
    std::int64_t total = 0;
    for (const auto& set : stencils) {
        for (const auto& layer : set) total += layer.macs(h, w);
    }
    return total;
}

template <typename T>
DeFiAm<T>::DeFiAm(const ModelConfig& cfg, std::mt19937& rng)
    : use_mshf(cfg.enable_mshf),
      use_diendec(cfg.enable_diendec),
      use_dac(cfg.enable_dac),
      lambda_channels(static_cast<int>(cfg.mshf_scales.size())),
      fem(cfg.channels, cfg.n_blocks, rng) {
    if (use_mshf) mshf = MshfBlock<T>(cfg.channels, cfg.mshf_scales);
    if (use_diendec) diendec = DiEnDec<T>(lambda_channels, rng);
    if (use_dac) dac = Dac<T>(cfg.channels, kDacReduction, T(1e-5), rng);
}

template <typename T>
NodeRef<T> DeFiAm<T>::forward(Tape<T>& tape, const NodeRef<T>& x,
                              AttentionForce force) const {
    if (force == AttentionForce::zero) return x;
    auto features = fem.forward(tape, x);
    if (force == AttentionForce::one || (!use_mshf && !use_diendec && !use_dac)) {
        return tape.add(x, features);
    }

    auto lambda = use_mshf
                      ? mshf.forward(tape, features)
                      : tape.broadcast_channel(tape.channel_mean(features), lambda_channels);
    auto v = use_diendec ? diendec.forward(tape, lambda) : tape.channel_mean(lambda);
    auto pre_gate = use_dac ? dac.forward(tape, v, x)
                            : tape.broadcast_channel(v, x->value.c());
    auto attention = tape.sigmoid(pre_gate);
    return tape.add(x, tape.mul(features, attention));
}

template <typename T>
void DeFiAm<T>::visit(const std::string& prefix, const ParamVisitor<T>& fn) const {
    fem.visit(prefix + ".fem", fn);
    if (use_mshf) mshf.visit(prefix + ".mshf", fn);
    if (use_diendec) diendec.visit(prefix + ".diendec", fn);
    if (use_dac) dac.visit(prefix + ".dac", fn);
}

template <typename T>
std::int64_t DeFiAm<T>::macs(int h, int w) const {
    std::int64_t total = fem.macs(h, w);
    if (use_mshf) total += mshf.macs(h, w);
    if (use_diendec) total += diendec.macs(h, w);
    if (use_dac) total += dac.macs();
    return total;
}

template <typename T>
DeFiANet<T>::DeFiANet(const ModelConfig& cfg, unsigned seed) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937 rng(seed);
    head_ = Conv2dLayer<T>(3, cfg_.channels, 3, 1, 1, true, rng);
    modules_.reserve(static_cast<std::size_t>(cfg_.n_modules));
    for (int i = 0; i < cfg_.n_modules; ++i) modules_.emplace_back(cfg_, rng);
    trunk_ = Conv2dLayer<T>(cfg_.channels, cfg_.channels, 3, 1, 1, true, rng);
    if (cfg_.scale == 3) {
        up_factors_ = {3};
    } else if (cfg_.scale == 2) {
        up_factors_ = {2};
    } else {
        up_factors_ = {2, 2};
    }
    for (int f : up_factors_) {
        up_convs_.emplace_back(cfg_.channels, cfg_.channels * f * f, 3, 1, 1, true, rng);
    }
    tail_ = Conv2dLayer<T>(cfg_.channels, 3, 3, 1, 1, true, rng);
}

template <typename T>
NodeRef<T> DeFiANet<T>::forward(Tape<T>& tape, const NodeRef<T>& lr,
                                AttentionForce force) const {
    require(lr->value.c() == 3,
            "defian: expected an RGB input, got " + lr->value.shape().str());

    Tensor<T> neg_mean(lr->value.n(), 3, 1, 1);
    Tensor<T> pos_mean(lr->value.n(), 3, 1, 1);
    for (int n = 0; n < lr->value.n(); ++n) {
        for (int c = 0; c < 3; ++c) {
            neg_mean.at(n, c, 0, 0) = static_cast<T>(-cfg_.rgb_mean[static_cast<std::size_t>(c)]);
            pos_mean.at(n, c, 0, 0) = static_cast<T>(cfg_.rgb_mean[static_cast<std::size_t>(c)]);
        }
    }

    auto x = tape.add_channel(lr, make_node(std::move(neg_mean), false));
    auto base = head_.forward(tape, x);
    auto t = base;
    for (const auto& module : modules_) {
        t = module.forward(tape, t, force);
    }
    t = tape.add(trunk_.forward(tape, t), base);
    for (std::size_t i = 0; i < up_convs_.size(); ++i) {
        t = tape.pixel_shuffle(up_convs_[i].forward(tape, t), up_factors_[i]);
    }
    t = tail_.forward(tape, t);
    return tape.add_channel(t, make_node(std::move(pos_mean), false));
}

template <typename T>
Tensor<T> DeFiANet<T>::infer(const Tensor<T>& lr) const {
    Tape<T> tape(false);
    auto out = forward(tape, make_node(lr, false));
    return out->value;
}

template <typename T>
void DeFiANet<T>::visit_params(const ParamVisitor<T>& fn) const {
    head_.visit("head", fn);
    for (std::size_t i = 0; i < modules_.size(); ++i) {
        modules_[i].visit("module" + std::to_string(i), fn);
    }
    trunk_.visit("trunk", fn);
    for (std::size_t i = 0; i < up_convs_.size(); ++i) {
        up_convs_[i].visit("up" + std::to_string(i), fn);
    }
    tail_.visit("tail", fn);
}

template <typename T>
std::vector<NodeRef<T>> DeFiANet<T>::parameters() const {
    std::vector<NodeRef<T>> params;
    visit_params([&params](const std::string&, const NodeRef<T>& p) {
        params.push_back(p);
    });
    return params;
}

template <typename T>
std::int64_t DeFiANet<T>::flops(int hr_width, int hr_height) const {
    require(hr_width % cfg_.scale == 0 && hr_height % cfg_.scale == 0,
            "flops: target size must be divisible by the upscale factor");
    const int lw = hr_width / cfg_.scale;
    const int lh = hr_height / cfg_.scale;

    std::int64_t total = head_.macs(lh, lw);
    for (const auto& module : modules_) total += module.macs(lh, lw);
    total += trunk_.macs(lh, lw);
    int h = lh, w = lw;
    for (std::size_t i = 0; i < up_convs_.size(); ++i) {
        total += up_convs_[i].macs(h, w);
        h *= up_factors_[i];
        w *= up_factors_[i];
    }
    total += tail_.macs(h, w);
    return total;
}

template <typename T>
std::int64_t count_params(const DeFiANet<T>& model) {
    std::int64_t total = 0;
    model.visit_params([&total](const std::string&, const NodeRef<T>& p) {
        if (p->requires_grad) total += p->value.size();
    });
    return total;
}

template struct Rcab<float>;
template struct Rcab<double>;
template struct Fem<float>;
template struct Fem<double>;
template struct MshfBlock<float>;
template struct MshfBlock<double>;
template struct DeFiAm<float>;
template struct DeFiAm<double>;
template class DeFiANet<float>;
template class DeFiANet<double>;
template std::int64_t count_params(const DeFiANet<float>&);
template std::int64_t count_params(const DeFiANet<double>&);

} // namespace defian
