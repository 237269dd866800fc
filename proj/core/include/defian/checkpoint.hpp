// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "defian/adam.hpp"
#include "defian/model.hpp"

namespace defian {

// Checkpoint file, version 1, all values little-endian:
//   "DFAN" magic, u16 version,
//   config block (architecture, rgb mean, update counter, optimizer step
//   counter, sampler RNG state),
//   u32 tensor count, then length-prefixed named float32 tensors: every model
//   parameter, followed by Adam first/second moments (names "adam.m:<param>",
//   "adam.v:<param>") when optimizer state is present.
// Loading parses and validates the whole file before any state is touched, so
// a truncated or corrupt file never yields a partial model.

struct LoadedCheckpoint {
    ModelConfig config;
    std::int64_t update_count = 0;
    bool has_optimizer = false;
    std::int64_t adam_step_count = 0;
    std::vector<Tensor<float>> adam_m;  // parameter order
    std::vector<Tensor<float>> adam_v;
    std::string rng_state;  // serialized std::mt19937, empty when absent
    std::shared_ptr<DeFiANet<float>> model;
};

void save_checkpoint(const std::string& path, const DeFiANet<float>& model,
                     std::int64_t update_count = 0,
                     const AdamOptimizer<float>* optimizer = nullptr,
                     const std::string& rng_state = {});

LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace defian
