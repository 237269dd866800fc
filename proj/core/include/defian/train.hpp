// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "defian/checkpoint.hpp"
#include "defian/dataset.hpp"
#include "defian/model.hpp"

namespace defian {

struct TrainConfig {
    int batch_size = 16;
    double lr0 = 1e-4;
    std::int64_t halve_every = 200000;  // updates per learning-rate halving
    std::int64_t total_updates = 2000;
    unsigned seed = 0;
    double grad_clip = 0.0;  // global L2 bound; off when <= 0
    std::int64_t checkpoint_every = 500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// lr0 * 0.5^floor(step / halve_every); `step` is the 1-based update counter,
// so the rate halves exactly at step = halve_every.
double lr_at(const TrainConfig& cfg, std::int64_t step);

struct TrainResult {
    std::vector<double> losses;       // one entry per update this call ran
    std::int64_t first_step = 1;      // step number of losses[0]
    std::string final_checkpoint;     // empty when out_dir was empty
};

// MAE training loop: sample batch -> forward -> loss -> backward -> optional
// clip -> Adam -> schedule. Deterministic for a fixed seed. Writes
// loss.csv (step,lr,loss) and periodic step_*.ckpt plus final.ckpt into
// out_dir (pass an empty out_dir to keep everything in memory). A non-finite
// loss aborts with a diagnostic naming the first non-finite tensor. Resuming
// from a checkpoint continues the remaining updates bit-exactly; the stored
// config must match the model.
TrainResult train(DeFiANet<float>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::string& out_dir,
                  const LoadedCheckpoint* resume = nullptr);

} // namespace defian
