// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace defian {

namespace {

constexpr std::uint16_t kVersion = 1;

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { put_le(v, 2); }
    void u32(std::uint32_t v) { put_le(v, 4); }
    void i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v), 4); }
    void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v), 8); }
    void f32(float v) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, 4);
        put_le(bits, 4);
    }
    void bytes(const void* data, std::size_t n) {
        const char* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    const std::string& str() const { return buf_; }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::int32_t i32() { return static_cast<std::int32_t>(get_le(4)); }
    std::int64_t i64() { return static_cast<std::int64_t>(get_le(8)); }
    float f32() {
        const std::uint32_t bits = u32();
        float v = 0;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string string(std::size_t n) {
        const char* p = take(n);
        return std::string(p, n);
    }
    void floats(float* dst, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) dst[i] = f32();
    }
    std::size_t offset() const { return pos_; }
    bool done() const { return pos_ == data_.size(); }

    [[noreturn]] void corrupt(const std::string& what) const {
        throw std::runtime_error("checkpoint parse error at byte " +
                                 std::to_string(pos_) + ": " + what);
    }

private:
    const char* take(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw std::runtime_error("checkpoint parse error at byte " +
                                     std::to_string(pos_) + ": unexpected end of file");
        }
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint64_t get_le(int n) {
        const char* p = take(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        }
        return v;
    }

    std::string data_;
    std::size_t pos_ = 0;
};

void write_tensor(ByteWriter& w, const std::string& name, const Tensor<float>& t) {
    require(name.size() < 65536, "checkpoint: tensor name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.i32(t.n());
    w.i32(t.c());
    w.i32(t.h());
    w.i32(t.w());
    for (std::int64_t i = 0; i < t.size(); ++i) w.f32(t[i]);
}

std::pair<std::string, Tensor<float>> read_tensor(ByteReader& r) {
    const std::uint16_t name_len = r.u16();
    std::string name = r.string(name_len);
    const int n = r.i32(), c = r.i32(), h = r.i32(), w = r.i32();
    if (n < 0 || c < 0 || h < 0 || w < 0 || static_cast<std::int64_t>(n) * c * h * w > (1ll << 31)) {
        r.corrupt("implausible tensor shape for \"" + name + "\"");
    }
    Tensor<float> t(n, c, h, w);
    r.floats(t.data(), static_cast<std::size_t>(t.size()));
    return {std::move(name), std::move(t)};
}

} // namespace

void save_checkpoint(const std::string& path, const DeFiANet<float>& model,
                     std::int64_t update_count, const AdamOptimizer<float>* optimizer,
                     const std::string& rng_state) {
    const ModelConfig& cfg = model.config();
    ByteWriter w;
    w.bytes("DFAN", 4);
    w.u16(kVersion);
    w.i32(cfg.n_modules);
    w.i32(cfg.n_blocks);
    w.i32(cfg.channels);
    w.i32(cfg.scale);
    w.u8(static_cast<std::uint8_t>(cfg.mshf_scales.size()));
    for (int k : cfg.mshf_scales) w.u8(static_cast<std::uint8_t>(k));
    w.u8(static_cast<std::uint8_t>((cfg.enable_mshf ? 1 : 0) |
                                   (cfg.enable_diendec ? 2 : 0) |
                                   (cfg.enable_dac ? 4 : 0)));
    for (float m : cfg.rgb_mean) w.f32(m);
    w.i64(update_count);
    const bool has_opt = optimizer && !optimizer->first_moments().empty();
    w.u8(has_opt ? 1 : 0);
    w.i64(has_opt ? optimizer->step_count() : 0);
    w.u32(static_cast<std::uint32_t>(rng_state.size()));
    w.bytes(rng_state.data(), rng_state.size());

    std::vector<std::pair<std::string, NodeRef<float>>> params;
    model.visit_params([&params](const std::string& name, const NodeRef<float>& p) {
        params.emplace_back(name, p);
    });
    if (has_opt) {
        require(optimizer->first_moments().size() == params.size(),
                "checkpoint: optimizer state does not match the parameter list");
    }

    const std::uint32_t tensor_count =
        static_cast<std::uint32_t>(params.size() * (has_opt ? 3 : 1));
    w.u32(tensor_count);
    for (const auto& [name, p] : params) write_tensor(w, name, p->value);
    if (has_opt) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            write_tensor(w, "adam.m:" + params[i].first, optimizer->first_moments()[i]);
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            write_tensor(w, "adam.v:" + params[i].first, optimizer->second_moments()[i]);
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
    if (!out) throw std::runtime_error("checkpoint: write to " + path + " failed");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(std::move(data));

    if (r.string(4) != "DFAN") r.corrupt("bad magic, not a checkpoint file");
    const std::uint16_t version = r.u16();
    if (version != kVersion) {
        r.corrupt("unsupported format version " + std::to_string(version));
    }

    LoadedCheckpoint ckpt;
    ModelConfig& cfg = ckpt.config;
    cfg.n_modules = r.i32();
    cfg.n_blocks = r.i32();
    cfg.channels = r.i32();
    cfg.scale = r.i32();
    const int n_scales = r.u8();
    cfg.mshf_scales.clear();
    for (int i = 0; i < n_scales; ++i) cfg.mshf_scales.push_back(r.u8());
    const std::uint8_t flags = r.u8();
    cfg.enable_mshf = (flags & 1) != 0;
    cfg.enable_diendec = (flags & 2) != 0;
    cfg.enable_dac = (flags & 4) != 0;
    for (float& m : cfg.rgb_mean) m = r.f32();
    ckpt.update_count = r.i64();
    ckpt.has_optimizer = r.u8() != 0;
    ckpt.adam_step_count = r.i64();
    const std::uint32_t rng_len = r.u32();
    ckpt.rng_state = r.string(rng_len);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        r.corrupt(std::string("invalid stored config: ") + e.what());
    }

    const std::uint32_t tensor_count = r.u32();
    std::map<std::string, Tensor<float>> tensors;
    for (std::uint32_t i = 0; i < tensor_count; ++i) {
        auto [name, t] = read_tensor(r);
        if (!tensors.emplace(std::move(name), std::move(t)).second) {
            r.corrupt("duplicate tensor name");
        }
    }
    if (!r.done()) r.corrupt("trailing bytes after the last tensor");

    // Everything parsed; only now build and fill the model.
    ckpt.model = std::make_shared<DeFiANet<float>>(cfg, /*seed=*/0);
    std::size_t assigned = 0;
    ckpt.model->visit_params([&](const std::string& name, const NodeRef<float>& p) {
        auto it = tensors.find(name);
        require(it != tensors.end(), "checkpoint: missing tensor \"" + name + "\"");
        require(it->second.shape() == p->value.shape(),
                "checkpoint: tensor \"" + name + "\" has shape " +
                    it->second.shape().str() + ", model expects " + p->value.shape().str());
        p->value = it->second;
        ++assigned;
        if (ckpt.has_optimizer) {
            auto m = tensors.find("adam.m:" + name);
            auto v = tensors.find("adam.v:" + name);
            require(m != tensors.end() && v != tensors.end(),
                    "checkpoint: missing optimizer state for \"" + name + "\"");
            require(m->second.shape() == p->value.shape() &&
                        v->second.shape() == p->value.shape(),
                    "checkpoint: optimizer state shape mismatch for \"" + name + "\"");
            ckpt.adam_m.push_back(m->second);
            ckpt.adam_v.push_back(v->second);
        }
    });
    const std::size_t expected = assigned * (ckpt.has_optimizer ? 3 : 1);
    require(expected == tensors.size(),
            "checkpoint: file contains " + std::to_string(tensors.size()) +
                " tensors, model expects " + std::to_string(expected));
    return ckpt;
}

} // namespace defian
