// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

// Command line surface: filter, bench-eig, train, eval, sr, count.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "defian/checkpoint.hpp"
#include "defian/config.hpp"
#include "defian/dataset.hpp"
#include "defian/eigen_bench.hpp"
#include "defian/hessian.hpp"
#include "defian/metrics.hpp"
#include "defian/train.hpp"

namespace fs = std::filesystem;
using namespace defian;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

void write_lmap(const std::string& path, const Tensor<float>& map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write("LMAP", 4);
    auto put_u32 = [&out](std::uint32_t v) {
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out.write(b, 4);
    };
    put_u32(static_cast<std::uint32_t>(map.h()));
    put_u32(static_cast<std::uint32_t>(map.w()));
    for (std::int64_t i = 0; i < map.size(); ++i) {
        float v = map[i];
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, 4);
        put_u32(bits);
    }
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

struct FilterOptions {
    std::string input;
    std::string scales = "3,5,7";
    std::string out_dir = ".";
};

int run_filter(const FilterOptions& opt) {
    std::vector<int> scales;
    try {
        scales = parse_int_list(opt.scales);
    } catch (const std::exception&) {
        std::cerr << "filter: --scales must be a comma list of integers\n";
        return kExitUsage;
    }
    if (scales.empty()) {
        std::cerr << "filter: --scales must not be empty\n";
        return kExitUsage;
    }
    for (int k : scales) {
        if (!HessianKernelSet::supported(k)) {
            std::cerr << "filter: unsupported scale " << k << " (supported: 3, 5, 7)\n";
            return kExitUsage;
        }
    }

    const Tensor<float> x = image_to_tensor(read_png(opt.input));
    fs::create_directories(opt.out_dir);
    const std::string stem = fs::path(opt.input).stem().string();

    for (int k : scales) {
        const Tensor<float> map = mshf(x, {k});  // (1, 1, h, w) channel-averaged
        float lo = map[0], hi = map[0];
        for (std::int64_t i = 0; i < map.size(); ++i) {
            lo = std::min(lo, map[i]);
            hi = std::max(hi, map[i]);
        }
        std::vector<std::uint8_t> gray(static_cast<std::size_t>(map.size()), 0);
        const float range = hi - lo;
        if (range > 1e-12f) {  // constant maps stay black
            for (std::int64_t i = 0; i < map.size(); ++i) {
                gray[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                    std::lround((map[i] - lo) / range * 255.0f));
            }
        }
        const fs::path base = fs::path(opt.out_dir) / (stem + "_k" + std::to_string(k));
        write_png_gray(base.string() + ".png", map.w(), map.h(), gray);
        write_lmap(base.string() + ".lmap", map);
        std::cout << base.string() << ".png\n" << base.string() << ".lmap\n";
    }
    return 0;
}

struct BenchOptions {
    std::string sizes;
    int reps = 10;
    std::string out;
};

int run_bench(const BenchOptions& opt) {
    std::vector<BenchSize> sizes;
    if (opt.sizes.empty()) {
        sizes = default_bench_sizes();
    } else {
        std::stringstream ss(opt.sizes);
        std::string item;
        while (std::getline(ss, item, ',')) {
            BenchSize size;
            if (std::sscanf(item.c_str(), "%dx%dx%d", &size.channels, &size.height,
                            &size.width) != 3 ||
                size.channels < 1 || size.height < 1 || size.width < 1) {
                std::cerr << "bench-eig: bad size \"" << item << "\", expected CxHxW\n";
                return kExitUsage;
            }
            sizes.push_back(size);
        }
    }
    const std::string csv = eigen_bench_csv(run_eigen_bench(sizes, opt.reps));
    if (opt.out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(opt.out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + opt.out);
        f << csv;
        std::cout << opt.out << "\n";
    }
    return 0;
}

ModelConfig model_config_from_options(const std::string& config_path,
                                      const std::string& preset, int scale) {
    if (!config_path.empty()) {
        return model_config_from(ConfigFile::parse_file(config_path));
    }
    if (preset == "defian_s") return ModelConfig::defian_s(scale);
    if (preset == "defian_l") return ModelConfig::defian_l(scale);
    throw std::runtime_error("unknown preset \"" + preset +
                             "\" (expected defian_s or defian_l)");
}

struct CountOptions {
    std::string config;
    std::string preset;
    int scale = 2;
};

int run_count(const CountOptions& opt) {
    const ModelConfig cfg = model_config_from_options(opt.config, opt.preset, opt.scale);
    DeFiANet<float> model(cfg);
    const std::int64_t params = count_params(model);
    const std::int64_t flops = count_flops(model);
    std::cout << "params " << params << " (" << std::fixed << std::setprecision(1)
              << params / 1e3 << "K)\n";
    std::cout << "flops_480x360 " << flops << " (" << std::setprecision(1) << flops / 1e9
              << "G)\n";
    return 0;
}

struct TrainOptions {
    std::string config;
    std::string data;
    std::string lr_data;
    std::string out;
    std::string resume;
};

int run_train(const TrainOptions& opt) {
    const ConfigFile file = ConfigFile::parse_file(opt.config);
    const ModelConfig model_cfg = model_config_from(file);
    const TrainConfig train_cfg = train_config_from(file);
    const DataConfig data_cfg = data_config_from(file);

    const std::string hr_dir = opt.data.empty() ? data_cfg.train_hr : opt.data;
    const std::string lr_dir = opt.lr_data.empty() ? data_cfg.train_lr : opt.lr_data;
    if (hr_dir.empty()) {
        throw std::runtime_error("train: no data directory (--data or [data] train_hr)");
    }
    const Dataset data = load_dataset(hr_dir, lr_dir, model_cfg.scale);

    if (!opt.resume.empty()) {
        LoadedCheckpoint ckpt = load_checkpoint(opt.resume);
        require(ckpt.config == model_cfg,
                "train: checkpoint config does not match --config; refusing to resume");
        TrainResult result = train(*ckpt.model, data, train_cfg, opt.out, &ckpt);
        std::cout << "resumed at step " << result.first_step << ", finished "
                  << result.losses.size() << " updates, checkpoint "
                  << result.final_checkpoint << "\n";
        return 0;
    }

    DeFiANet<float> model(model_cfg, train_cfg.seed);
    TrainResult result = train(model, data, train_cfg, opt.out);
    std::cout << "finished " << result.losses.size() << " updates, checkpoint "
              << result.final_checkpoint << "\n";
    return 0;
}

struct EvalOptions {
    std::string ckpt;
    std::string hr_dir;
    std::string lr_dir;
    std::string out_csv;
    int shave_override = -1;  // -1: default (= scale)
    bool no_shave = false;
};

int run_eval(const EvalOptions& opt) {
    LoadedCheckpoint ckpt = load_checkpoint(opt.ckpt);
    const int scale = ckpt.config.scale;
    const Dataset data = load_dataset(opt.hr_dir, opt.lr_dir, scale);
    const int border = opt.no_shave ? 0 : (opt.shave_override >= 0 ? opt.shave_override : scale);

    std::ostringstream csv;
    csv << "image,psnr_db,ssim\n";
    double psnr_sum = 0, ssim_sum = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor<float> sr = ckpt.model->infer(image_to_tensor(data.lr[i]));
        Plane a = luminance(tensor_to_image(sr));
        Plane b = luminance(data.hr[i]);
        if (border > 0) {
            a = shave(a, border);
            b = shave(b, border);
        }
        const double p = psnr(a, b);
        const double s = ssim(a, b);
        psnr_sum += p;
        ssim_sum += s;
        csv << data.names[i] << "," << std::setprecision(6) << p << "," << s << "\n";
    }
    csv << "mean," << std::setprecision(6) << psnr_sum / static_cast<double>(data.size())
        << "," << ssim_sum / static_cast<double>(data.size()) << "\n";

    if (opt.out_csv.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(opt.out_csv, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + opt.out_csv);
        f << csv.str();
        std::cout << "mean psnr "
                  << psnr_sum / static_cast<double>(data.size()) << " dB, mean ssim "
                  << ssim_sum / static_cast<double>(data.size()) << "\n";
    }
    return 0;
}

struct SrOptions {
    std::string ckpt;
    std::string input;
    std::string output;
};

int run_sr(const SrOptions& opt) {
    LoadedCheckpoint ckpt = load_checkpoint(opt.ckpt);
    const Tensor<float> lr = image_to_tensor(read_png(opt.input));
    const Tensor<float> sr = ckpt.model->infer(lr);
    write_png(opt.output, tensor_to_image(sr));
    std::cout << opt.output << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeFiAN: detail-fidelity attention super-resolution toolkit"};
    app.require_subcommand(1);

    FilterOptions filter_opt;
    auto* filter = app.add_subcommand(
        "filter", "Write multi-scale Hessian eigenvalue maps for an image");
    filter->add_option("input", filter_opt.input, "input PNG")->required();
    filter->add_option("--scales", filter_opt.scales, "comma list of stencil scales");
    filter->add_option("--out", filter_opt.out_dir, "output directory");

    BenchOptions bench_opt;
    auto* bench = app.add_subcommand(
        "bench-eig", "Time closed-form eigenvalue filtering against the per-pixel solver");
    bench->add_option("--sizes", bench_opt.sizes, "comma list of CxHxW sizes");
    bench->add_option("--reps", bench_opt.reps, "timed repetitions per size")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_opt.out, "CSV output path (default: stdout)");

    CountOptions count_opt;
    auto* count = app.add_subcommand("count", "Print parameter and multiply-add counts");
    count->add_option("--config", count_opt.config, "config file with a [model] section");
    count->add_option("--preset", count_opt.preset, "defian_s or defian_l");
    count->add_option("--scale", count_opt.scale, "upscale factor for --preset");

    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    train_cmd->add_option("--config", train_opt.config, "config file")->required();
    train_cmd->add_option("--data", train_opt.data, "directory of HR PNGs");
    train_cmd->add_option("--lr-data", train_opt.lr_data, "directory of LR PNGs");
    train_cmd->add_option("--out", train_opt.out, "output directory")->required();
    train_cmd->add_option("--resume", train_opt.resume, "checkpoint to resume from");

    EvalOptions eval_opt;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate PSNR/SSIM on a directory");
    eval_cmd->add_option("--ckpt", eval_opt.ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--hr", eval_opt.hr_dir, "directory of HR PNGs")->required();
    eval_cmd->add_option("--lr", eval_opt.lr_dir, "directory of LR PNGs (default: bicubic)");
    eval_cmd->add_option("--out", eval_opt.out_csv, "CSV output path (default: stdout)");
    eval_cmd->add_option("--shave", eval_opt.shave_override,
                         "border crop before metrics (default: upscale factor)");
    eval_cmd->add_flag("--no-shave", eval_opt.no_shave, "disable the border crop");

    SrOptions sr_opt;
    auto* sr_cmd = app.add_subcommand("sr", "Upscale one image");
    sr_cmd->add_option("--ckpt", sr_opt.ckpt, "checkpoint file")->required();
    sr_cmd->add_option("--in", sr_opt.input, "input PNG")->required();
    sr_cmd->add_option("--out", sr_opt.output, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;  // 0: --help and friends
    }

    try {
        if (filter->parsed()) return run_filter(filter_opt);
        if (bench->parsed()) return run_bench(bench_opt);
        if (count->parsed()) return run_count(count_opt);
        if (train_cmd->parsed()) return run_train(train_opt);
        if (eval_cmd->parsed()) return run_eval(eval_opt);
        if (sr_cmd->parsed()) return run_sr(sr_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
