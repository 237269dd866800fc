// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace defian {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) parts.push_back(trim(item));
    return parts;
}

[[noreturn]] void bad_field(const std::string& section, const std::string& key,
                            const std::string& what) {
    throw std::runtime_error("config: [" + section + "] " + key + ": " + what);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                         ": malformed section header \"" + line + "\"");
            }
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": expected key = value, got \"" + line + "\"");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": empty key");
        }
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return fallback;
    auto kv = it->second.find(key);
    return kv == it->second.end() ? fallback : kv->second;
}

std::string ConfigFile::get_required(const std::string& section, const std::string& key) const {
    if (!has(section, key)) bad_field(section, key, "missing required value");
    return get(section, key, "");
}

long ConfigFile::get_int(const std::string& section, const std::string& key,
                         long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key, "");
    try {
        std::size_t used = 0;
        const long v = std::stol(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        bad_field(section, key, "not an integer: \"" + raw + "\"");
    }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key, "");
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        bad_field(section, key, "not a number: \"" + raw + "\"");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string raw = get(section, key, "");
    std::transform(raw.begin(), raw.end(), raw.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (raw == "1" || raw == "true" || raw == "on" || raw == "yes") return true;
    if (raw == "0" || raw == "false" || raw == "off" || raw == "no") return false;
    bad_field(section, key, "not a boolean: \"" + raw + "\"");
}

namespace {

void check_known_keys(const ConfigFile& cfg, const std::string& section,
                      const std::set<std::string>& known) {
    auto it = cfg.sections().find(section);
    if (it == cfg.sections().end()) return;
    for (const auto& [key, value] : it->second) {
        (void)value;
        if (!known.count(key)) bad_field(section, key, "unknown key");
    }
}

} // namespace

ModelConfig model_config_from(const ConfigFile& cfg) {
    check_known_keys(cfg, "model",
                     {"preset", "scale", "n_modules", "n_blocks", "channels",
                      "mshf_scales", "enable_mshf", "enable_diendec", "enable_dac",
                      "rgb_mean"});

    const int scale = static_cast<int>(cfg.get_int("model", "scale", 2));
    ModelConfig model;
    const std::string preset = cfg.get("model", "preset", "");
    if (preset == "defian_s") {
        model = ModelConfig::defian_s(scale);
    } else if (preset == "defian_l") {
        model = ModelConfig::defian_l(scale);
    } else if (preset.empty()) {
        model.scale = scale;
    } else {
        bad_field("model", "preset", "unknown preset \"" + preset +
                                         "\" (expected defian_s or defian_l)");
    }

    model.n_modules = static_cast<int>(cfg.get_int("model", "n_modules", model.n_modules));
    model.n_blocks = static_cast<int>(cfg.get_int("model", "n_blocks", model.n_blocks));
    model.channels = static_cast<int>(cfg.get_int("model", "channels", model.channels));
    model.enable_mshf = cfg.get_bool("model", "enable_mshf", model.enable_mshf);
    model.enable_diendec = cfg.get_bool("model", "enable_diendec", model.enable_diendec);
    model.enable_dac = cfg.get_bool("model", "enable_dac", model.enable_dac);

    if (cfg.has("model", "mshf_scales")) {
        model.mshf_scales.clear();
        for (const std::string& item : split(cfg.get("model", "mshf_scales", ""), ',')) {
            if (item.empty()) continue;
            try {
                model.mshf_scales.push_back(std::stoi(item));
            } catch (const std::exception&) {
                bad_field("model", "mshf_scales", "not an integer list");
            }
        }
    }
    if (cfg.has("model", "rgb_mean")) {
        const auto parts = split(cfg.get("model", "rgb_mean", ""), ',');
        if (parts.size() != 3) bad_field("model", "rgb_mean", "expected three values");
        for (int c = 0; c < 3; ++c) {
            try {
                model.rgb_mean[static_cast<std::size_t>(c)] =
                    std::stof(parts[static_cast<std::size_t>(c)]);
            } catch (const std::exception&) {
                bad_field("model", "rgb_mean", "not a number list");
            }
        }
    }

    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config: [model] invalid: ") + e.what());
    }
    return model;
}

TrainConfig train_config_from(const ConfigFile& cfg) {
    check_known_keys(cfg, "train",
                     {"batch_size", "lr0", "halve_every", "total_updates", "seed",
                      "grad_clip", "checkpoint_every", "beta1", "beta2", "adam_eps"});
    TrainConfig train;
    train.batch_size = static_cast<int>(cfg.get_int("train", "batch_size", train.batch_size));
    train.lr0 = cfg.get_double("train", "lr0", train.lr0);
    train.halve_every = cfg.get_int("train", "halve_every", train.halve_every);
    train.total_updates = cfg.get_int("train", "total_updates", train.total_updates);
    train.seed = static_cast<unsigned>(cfg.get_int("train", "seed", 0));
    train.grad_clip = cfg.get_double("train", "grad_clip", train.grad_clip);
    train.checkpoint_every =
        cfg.get_int("train", "checkpoint_every", train.checkpoint_every);
    train.beta1 = cfg.get_double("train", "beta1", train.beta1);
    train.beta2 = cfg.get_double("train", "beta2", train.beta2);
    train.adam_eps = cfg.get_double("train", "adam_eps", train.adam_eps);
    try {
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config: [train] invalid: ") + e.what());
    }
    return train;
}

DataConfig data_config_from(const ConfigFile& cfg) {
    check_known_keys(cfg, "data", {"train_hr", "train_lr"});
    DataConfig data;
    data.train_hr = cfg.get("data", "train_hr", "");
    data.train_lr = cfg.get("data", "train_lr", "");
    return data;
}

} // namespace defian
