// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "defian/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace defian {

Plane luminance(const ImageBuffer& img) {
    Plane p(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            p.at(x, y) = (65.738 * img.at(x, y, 0) + 129.057 * img.at(x, y, 1) +
                          25.064 * img.at(x, y, 2)) /
                             256.0 +
                         16.0;
        }
    }
    return p;
}

Plane shave(const Plane& p, int border) {
    require(border >= 0, "shave: negative border");
    require(p.width > 2 * border && p.height > 2 * border,
            "shave: border larger than the plane");
    Plane out(p.width - 2 * border, p.height - 2 * border);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = p.at(x + border, y + border);
        }
    }
    return out;
}

double psnr(const Plane& a, const Plane& b) {
    require(a.width == b.width && a.height == b.height, "psnr: plane sizes differ");
    require(!a.v.empty(), "psnr: empty planes");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.v.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWindow = 11;

std::array<double, kWindow> gaussian_window() {
    std::array<double, kWindow> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - (kWindow - 1) / 2.0;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& x : w) x /= sum;
    return w;
}

} // namespace

double ssim(const Plane& a, const Plane& b) {
    require(a.width == b.width && a.height == b.height, "ssim: plane sizes differ");
    require(a.width >= kWindow && a.height >= kWindow,
            "ssim: planes must be at least 11x11");

    static const std::array<double, kWindow> win = gaussian_window();
    constexpr double kL = 255.0;
    constexpr double c1 = (0.01 * kL) * (0.01 * kL);
    constexpr double c2 = (0.03 * kL) * (0.03 * kL);

    const int out_w = a.width - kWindow + 1;
    const int out_h = a.height - kWindow + 1;
    double total = 0.0;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int wy = 0; wy < kWindow; ++wy) {
                double ra = 0, rb = 0, raa = 0, rbb = 0, rab = 0;
                for (int wx = 0; wx < kWindow; ++wx) {
                    const double pa = a.at(x + wx, y + wy);
                    const double pb = b.at(x + wx, y + wy);
                    const double ww = win[static_cast<std::size_t>(wx)];
                    ra += ww * pa;
                    rb += ww * pb;
                    raa += ww * pa * pa;
                    rbb += ww * pb * pb;
                    rab += ww * pa * pb;
                }
                const double wy_w = win[static_cast<std::size_t>(wy)];
                mu_a += wy_w * ra;
                mu_b += wy_w * rb;
                aa += wy_w * raa;
                bb += wy_w * rbb;
                ab += wy_w * rab;
            }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
        }
    }
    return total / (static_cast<double>(out_w) * out_h);
}

} // namespace defian
