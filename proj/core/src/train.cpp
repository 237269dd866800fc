// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "defian/adam.hpp"

namespace defian {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    require(batch_size >= 1, "train config: batch_size must be >= 1");
    require(lr0 > 0.0, "train config: lr0 must be positive");
    require(halve_every >= 1, "train config: halve_every must be >= 1");
    require(total_updates >= 1, "train config: total_updates must be >= 1");
    require(checkpoint_every >= 1, "train config: checkpoint_every must be >= 1");
}

double lr_at(const TrainConfig& cfg, std::int64_t step) {
    require(step >= 1, "lr_at: steps are 1-based");
    return cfg.lr0 * std::pow(0.5, static_cast<double>(step / cfg.halve_every));
}

namespace {

std::string serialize_rng(const std::mt19937& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void restore_rng(std::mt19937& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng;
    if (!is) throw std::runtime_error("train: cannot restore sampler RNG state");
}

// Stacks `count` draws into one (count, 3, h, w) pair of batch tensors.
void fill_batch(const Dataset& data, int count, std::mt19937& rng,
                Tensor<float>& lr_batch, Tensor<float>& hr_batch) {
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (int k = 0; k < count; ++k) {
        const SamplePair sample = sample_patch(data, pick(rng), rng, true);
        std::copy(sample.lr.data(), sample.lr.data() + sample.lr.size(),
                  lr_batch.plane(k, 0));
        std::copy(sample.hr.data(), sample.hr.data() + sample.hr.size(),
                  hr_batch.plane(k, 0));
    }
}

std::string first_non_finite_name(const DeFiANet<float>& model,
                                  const NodeRef<float>& output) {
    std::string found;
    model.visit_params([&](const std::string& name, const NodeRef<float>& p) {
        if (found.empty() && first_non_finite(p->value) >= 0) found = name;
    });
    if (found.empty()) {
        model.visit_params([&](const std::string& name, const NodeRef<float>& p) {
            if (found.empty() && first_non_finite(p->grad) >= 0) found = name + ".grad";
        });
    }
    if (found.empty() && first_non_finite(output->value) >= 0) found = "network output";
    return found.empty() ? "loss" : found;
}

} // namespace

TrainResult train(DeFiANet<float>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::string& out_dir, const LoadedCheckpoint* resume) {
    cfg.validate();
    require(data.size() > 0, "train: empty dataset");

    const int s = model.config().scale;
    require(data.scale == s, "train: dataset scale " + std::to_string(data.scale) +
                                 " does not match the model scale " + std::to_string(s));

    std::mt19937 rng(cfg.seed);
    AdamOptimizer<float> optimizer(static_cast<float>(cfg.beta1),
                                   static_cast<float>(cfg.beta2),
                                   static_cast<float>(cfg.adam_eps));
    std::vector<NodeRef<float>> params = model.parameters();

    std::int64_t start_step = 1;
    if (resume) {
        require(resume->config == model.config(),
                "train: checkpoint config does not match the model; refusing to resume");
        require(resume->update_count < cfg.total_updates,
                "train: checkpoint already has " + std::to_string(resume->update_count) +
                    " updates, nothing left to run");
        if (resume->has_optimizer) {
            require(resume->adam_m.size() == params.size(),
                    "train: checkpoint optimizer state does not match the model");
            optimizer.restore(resume->adam_m, resume->adam_v, resume->adam_step_count);
        }
        if (!resume->rng_state.empty()) restore_rng(rng, resume->rng_state);
        start_step = resume->update_count + 1;
    }

    std::ofstream trace;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const auto mode = resume ? std::ios::app : std::ios::trunc;
        trace.open(fs::path(out_dir) / "loss.csv", mode);
        if (!trace) throw std::runtime_error("train: cannot write loss.csv in " + out_dir);
        if (!resume) trace << "step,lr,loss\n";
    }

    TrainResult result;
    result.first_step = start_step;

    Tensor<float> lr_batch(cfg.batch_size, 3, kPatchSize, kPatchSize);
    Tensor<float> hr_batch(cfg.batch_size, 3, kPatchSize * s, kPatchSize * s);

    for (std::int64_t step = start_step; step <= cfg.total_updates; ++step) {
        fill_batch(data, cfg.batch_size, rng, lr_batch, hr_batch);

        Tape<float> tape;
        auto input = make_node(lr_batch, false);
        auto target = make_node(hr_batch, false);
        auto output = model.forward(tape, input);
        auto loss = tape.mean_abs_error(output, target);

        const double loss_value = static_cast<double>(loss->value[0]);
        if (!std::isfinite(loss_value)) {
            throw std::runtime_error("train: aborted at step " + std::to_string(step) +
                                     ": non-finite value in " +
                                     first_non_finite_name(model, output));
        }

        optimizer.zero_grad(params);
        tape.backward(loss);
        if (cfg.grad_clip > 0.0) {
            clip_grad_norm(params, static_cast<float>(cfg.grad_clip));
        }
        optimizer.step(params, static_cast<float>(lr_at(cfg, step)));

        result.losses.push_back(loss_value);
        if (trace.is_open()) {
            trace << step << "," << std::setprecision(10) << lr_at(cfg, step) << ","
                  << std::setprecision(9) << loss_value << "\n";
            trace.flush();
        }

        if (!out_dir.empty() &&
            (step % cfg.checkpoint_every == 0 || step == cfg.total_updates)) {
            std::ostringstream name;
            name << "step_" << std::setfill('0') << std::setw(6) << step << ".ckpt";
            save_checkpoint((fs::path(out_dir) / name.str()).string(), model, step,
                            &optimizer, serialize_rng(rng));
        }
    }

    if (!out_dir.empty()) {
        const std::string final_path = (fs::path(out_dir) / "final.ckpt").string();
        save_checkpoint(final_path, model, cfg.total_updates, &optimizer,
                        serialize_rng(rng));
        result.final_checkpoint = final_path;
    }
    return result;
}

} // namespace defian
