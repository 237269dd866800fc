// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "defian/train.hpp"
#include "testutil.hpp"

using namespace defian;
using namespace defian::test;

namespace fs = std::filesystem;

namespace {

ModelConfig micro_config() {
    ModelConfig cfg;
    cfg.n_modules = 1;
    cfg.n_blocks = 1;
    cfg.channels = 4;
    cfg.scale = 2;
    return cfg;
}

TrainConfig quick_train(std::int64_t updates) {
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.lr0 = 1e-3;
    cfg.total_updates = updates;
    cfg.checkpoint_every = 3;
    cfg.seed = 5;
    return cfg;
}

std::string temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("learning rate schedule halves exactly on the boundary") {
    TrainConfig cfg;
    cfg.lr0 = 1e-4;
    cfg.halve_every = 200000;
    CHECK(lr_at(cfg, 1) == doctest::Approx(1e-4));
    CHECK(lr_at(cfg, 199999) == doctest::Approx(1e-4));
    CHECK(lr_at(cfg, 200000) == doctest::Approx(5e-5));
    CHECK(lr_at(cfg, 399999) == doctest::Approx(5e-5));
    CHECK(lr_at(cfg, 400000) == doctest::Approx(2.5e-5));
    CHECK_THROWS_AS(lr_at(cfg, 0), std::invalid_argument);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
    const Dataset data = synthetic_dataset(4, 128, 2, 21);
    const TrainConfig cfg = quick_train(6);

    DeFiANet<float> model_a(micro_config(), cfg.seed);
    DeFiANet<float> model_b(micro_config(), cfg.seed);
    const TrainResult a = train(model_a, data, cfg, "");
    const TrainResult b = train(model_b, data, cfg, "");

    REQUIRE(a.losses.size() == 6);
    for (std::size_t i = 0; i < a.losses.size(); ++i) {
        CHECK(a.losses[i] == b.losses[i]);  // bit-exact trace
    }
    CHECK(a.final_checkpoint.empty());

    // And the resulting weights agree bit-exactly too.
    std::vector<NodeRef<float>> pa = model_a.parameters();
    std::vector<NodeRef<float>> pb = model_b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(max_abs_diff(pa[i]->value, pb[i]->value) == 0.0);
    }
}

TEST_CASE("training writes the loss trace and checkpoints") {
    const Dataset data = synthetic_dataset(4, 128, 2, 22);
    const TrainConfig cfg = quick_train(4);
    const std::string out = temp_dir("defian_train_out");

    DeFiANet<float> model(micro_config(), cfg.seed);
    const TrainResult result = train(model, data, cfg, out);
    CHECK(result.losses.size() == 4);
    for (double v : result.losses) CHECK(std::isfinite(v));

    std::ifstream csv(fs::path(out) / "loss.csv");
    REQUIRE(csv.good());
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 5);  // header + 4 steps

    CHECK(fs::exists(fs::path(out) / "step_000003.ckpt"));
    CHECK(fs::exists(fs::path(out) / "final.ckpt"));
    CHECK(result.final_checkpoint == (fs::path(out) / "final.ckpt").string());
    fs::remove_all(out);
}

TEST_CASE("resuming mid-run reproduces the remaining trace bit-exactly") {
    const Dataset data = synthetic_dataset(4, 128, 2, 23);
    const std::string out = temp_dir("defian_resume_out");

    // Continuous reference run: 6 updates.
    TrainConfig full_cfg = quick_train(6);
    DeFiANet<float> reference(micro_config(), full_cfg.seed);
    const TrainResult reference_run = train(reference, data, full_cfg, "");

    // Stop after 3 (checkpoint_every = 3 drops step_000003.ckpt), then resume.
    TrainConfig first_cfg = quick_train(3);
    DeFiANet<float> model(micro_config(), first_cfg.seed);
    const TrainResult first = train(model, data, first_cfg, out);
    for (int i = 0; i < 3; ++i) CHECK(first.losses[i] == reference_run.losses[i]);

    LoadedCheckpoint ckpt = load_checkpoint((fs::path(out) / "step_000003.ckpt").string());
    CHECK(ckpt.update_count == 3);
    CHECK(ckpt.has_optimizer);
    const TrainResult rest = train(*ckpt.model, data, full_cfg, out, &ckpt);
    CHECK(rest.first_step == 4);
    REQUIRE(rest.losses.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(rest.losses[i] == reference_run.losses[static_cast<std::size_t>(i) + 3]);
    }

    // Weights after resume match the continuous run bit-exactly.
    std::vector<NodeRef<float>> pa = reference.parameters();
    std::vector<NodeRef<float>> pb = ckpt.model->parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(max_abs_diff(pa[i]->value, pb[i]->value) == 0.0);
    }
    fs::remove_all(out);
}

TEST_CASE("a mismatched checkpoint config refuses to resume") {
    const Dataset data = synthetic_dataset(4, 128, 2, 24);
    const std::string out = temp_dir("defian_mismatch_out");

    TrainConfig cfg = quick_train(2);
    DeFiANet<float> model(micro_config(), cfg.seed);
    train(model, data, cfg, out);

    LoadedCheckpoint ckpt = load_checkpoint((fs::path(out) / "final.ckpt").string());
    ModelConfig other = micro_config();
    other.channels = 8;
    DeFiANet<float> wrong(other, cfg.seed);
    cfg.total_updates = 4;
    ckpt.config.channels = 8;  // forged header: caught against the real model
    CHECK_THROWS_AS(train(wrong, data, cfg, "", &ckpt), std::invalid_argument);
    fs::remove_all(out);
}

TEST_CASE("non-finite losses abort with the offending tensor named") {
    const Dataset data = synthetic_dataset(4, 128, 2, 25);
    TrainConfig cfg = quick_train(2);
    DeFiANet<float> model(micro_config(), cfg.seed);
    model.parameters().front()->value[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_WITH_AS(train(model, data, cfg, ""),
                         doctest::Contains("non-finite value in head.weight"),
                         std::runtime_error);
}

TEST_CASE("dataset/model scale mismatch is rejected") {
    const Dataset data = synthetic_dataset(2, 128, 3, 26);
    TrainConfig cfg = quick_train(1);
    DeFiANet<float> model(micro_config(), cfg.seed);  // scale 2
    CHECK_THROWS_AS(train(model, data, cfg, ""), std::invalid_argument);
}

TEST_CASE("gradient clipping bounds the joint gradient norm") {
    auto a = make_node(Tensor<float>({1, 1, 1, 2}, {0.0f, 0.0f}), true);
    auto b = make_node(Tensor<float>({1, 1, 1, 1}, {0.0f}), true);
    a->grad[0] = 3.0f;
    a->grad[1] = 4.0f;
    b->grad[0] = 12.0f;  // joint norm 13
    const float norm = clip_grad_norm<float>({a, b}, 6.5f);
    CHECK(norm == doctest::Approx(13.0f));
    CHECK(a->grad[0] == doctest::Approx(1.5f));
    CHECK(a->grad[1] == doctest::Approx(2.0f));
    CHECK(b->grad[0] == doctest::Approx(6.0f));

    // Under the bound: untouched.
    const float same = clip_grad_norm<float>({a, b}, 100.0f);
    CHECK(same == doctest::Approx(6.5f));
    CHECK(b->grad[0] == doctest::Approx(6.0f));
}
