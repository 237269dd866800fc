// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "defian/model.hpp"
#include "defian/train.hpp"

namespace defian {

// Flat key = value configuration with [section] headers and '#' comments:
//
//   [model]
//   preset = defian_s     # or n_modules / n_blocks / channels
//   scale = 2
//   [train]
//   total_updates = 2000
//   [data]
//   train_hr = path/to/hr
//
// Unknown keys are rejected with the offending section and key named.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string get_required(const std::string& section, const std::string& key) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// [model] section -> ModelConfig. Presets defian_s / defian_l fill N, M and C;
// explicit keys override.
ModelConfig model_config_from(const ConfigFile& cfg);

// [train] section -> TrainConfig.
TrainConfig train_config_from(const ConfigFile& cfg);

struct DataConfig {
    std::string train_hr;
    std::string train_lr;  // empty: bicubic-generated LR
};
DataConfig data_config_from(const ConfigFile& cfg);

} // namespace defian
