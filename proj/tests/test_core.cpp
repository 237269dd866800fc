// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "defian/adam.hpp"
#include "defian/autodiff.hpp"
#include "testutil.hpp"

using namespace defian;
using namespace defian::test;

TEST_CASE("conv2d: full vs partial kernel overlap") {
    Tape<float> tape;
    auto x = make_node(Tensor<float>::full({1, 1, 3, 3}, 1.0f));
    auto w = make_node(Tensor<float>::full({1, 1, 3, 3}, 1.0f));
    ConvSpec spec{3, 1, 1, 1, 1, false};
    auto y = tape.conv2d(x, w, nullptr, spec);
    CHECK(y->value.shape() == Shape{1, 1, 3, 3});
    CHECK(y->value.at(0, 0, 1, 1) == doctest::Approx(9.0f));
    CHECK(y->value.at(0, 0, 0, 0) == doctest::Approx(4.0f));
    CHECK(y->value.at(0, 0, 2, 2) == doctest::Approx(4.0f));
    CHECK(y->value.at(0, 0, 0, 2) == doctest::Approx(4.0f));
}

TEST_CASE("conv2d: Kronecker delta kernel is the identity") {
    std::mt19937 rng(7);
    Tensor<float> input(2, 3, 6, 5);
    fill_uniform(input, rng);
    for (int k : {3, 5}) {
        Tensor<float> wt(3, 3, k, k);
        for (int c = 0; c < 3; ++c) wt.at(c, c, k / 2, k / 2) = 1.0f;
        Tape<float> tape;
        ConvSpec spec{k, 1, (k - 1) / 2, 3, 3, false};
        auto y = tape.conv2d(make_node(input), make_node(wt), nullptr, spec);
        CHECK(max_abs_diff(y->value, input) == 0.0);
    }
}

TEST_CASE("conv2d: dilated case matches the loop reference") {
    std::mt19937 rng(11);
    Tensor<float> input(2, 4, 9, 9);
    Tensor<float> wt(3, 4, 3, 3);
    Tensor<float> bias(1, 3, 1, 1);
    fill_uniform(input, rng);
    fill_uniform(wt, rng);
    fill_uniform(bias, rng);

    ConvSpec spec{3, 2, 2, 4, 3, true};
    Tape<float> tape;
    auto y = tape.conv2d(make_node(input), make_node(wt), make_node(bias), spec);
    CHECK(y->value.h() == 9);
    CHECK(y->value.w() == 9);
    Tensor<float> expected = naive_conv2d(input, wt, bias.data(), spec);
    CHECK(max_abs_diff(y->value, expected) <= 1e-6);
}

TEST_CASE("conv2d: shape errors are reported") {
    Tape<float> tape;
    auto x = make_node(Tensor<float>(1, 2, 4, 4));
    auto w = make_node(Tensor<float>(1, 1, 3, 3));
    ConvSpec spec{3, 1, 1, 1, 1, false};
    CHECK_THROWS_AS(tape.conv2d(x, w, nullptr, spec), std::invalid_argument);

    auto x1 = make_node(Tensor<float>(1, 1, 2, 2));
    ConvSpec shrink{3, 1, 0, 1, 1, false};  // 2 - 2 = 0 output
    CHECK_THROWS_AS(tape.conv2d(x1, w, nullptr, shrink), std::invalid_argument);
}

TEST_CASE("size-preserving padding rule holds for odd k and d in {1,2,4}") {
    std::mt19937 rng(3);
    for (int k : {3, 5, 7}) {
        for (int d : {1, 2, 4}) {
            const int pad = size_preserving_padding(k, d);
            const int extent = d * (k - 1) + 1;  // minimum input that fits
            Tensor<float> input(1, 2, extent, extent + 3);
            Tensor<float> wt(2, 2, k, k);
            fill_uniform(input, rng);
            fill_uniform(wt, rng);
            Tape<float> tape;
            ConvSpec spec{k, d, pad, 2, 2, false};
            auto y = tape.conv2d(make_node(input), make_node(wt), nullptr, spec);
            CHECK(y->value.shape() == input.shape());
        }
    }
}

TEST_CASE("deconv2d: delta kernel identity and all-ones centre") {
    std::mt19937 rng(5);
    Tensor<float> input(1, 2, 5, 5);
    fill_uniform(input, rng);
    Tensor<float> delta(2, 2, 3, 3);
    for (int c = 0; c < 2; ++c) delta.at(c, c, 1, 1) = 1.0f;
    Tape<float> tape;
    ConvSpec spec{3, 1, 1, 2, 2, false};
    auto y = tape.deconv2d(make_node(input), make_node(delta), nullptr, spec);
    CHECK(max_abs_diff(y->value, input) == 0.0);

    auto ones = make_node(Tensor<float>::full({1, 1, 3, 3}, 1.0f));
    auto wt = make_node(Tensor<float>::full({1, 1, 3, 3}, 1.0f));
    ConvSpec one_spec{3, 1, 1, 1, 1, false};
    auto z = tape.deconv2d(ones, wt, nullptr, one_spec);
    CHECK(z->value.at(0, 0, 1, 1) == doctest::Approx(9.0f));
}

TEST_CASE("deconv2d is the adjoint of conv2d") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> dk(0, 1), dd(0, 2), dc(1, 3), ds(5, 9);
        const int k = dk(rng) ? 3 : 5;
        const int d = 1 << dd(rng);
        const int p = std::uniform_int_distribution<int>(0, d * (k - 1) / 2)(rng);
        const int cin = dc(rng), cout = dc(rng);
        const int h = ds(rng) + d * (k - 1), w = ds(rng) + d * (k - 1);

        ConvSpec spec{k, d, p, cin, cout, false};
        Tensor<float> x(2, cin, h, w), wt(cout, cin, k, k);
        fill_uniform(x, rng);
        fill_uniform(wt, rng);
        Tensor<float> y(2, cout, spec.out_extent(h), spec.out_extent(w));
        fill_uniform(y, rng);

        Tape<float> tape;
        auto ax = tape.conv2d(make_node(x), make_node(wt), nullptr, spec);
        ConvSpec tspec = spec;
        std::swap(tspec.in_channels, tspec.out_channels);
        auto aty = tape.deconv2d(make_node(y), make_node(wt), nullptr, tspec);
        CHECK(aty->value.shape() == x.shape());

        const double lhs = dot(ax->value, y);
        const double rhs = dot(x, aty->value);
        CHECK(std::abs(lhs - rhs) <= 1e-5 * (std::abs(lhs) + 1.0));
    }
}

TEST_CASE("activations: pinned values") {
    Tape<double> tape;
    auto x = make_node(Tensor<double>({1, 1, 1, 2}, {-3.0, 2.0}));
    auto r = tape.relu(x);
    CHECK(r->value[0] == 0.0);
    CHECK(r->value[1] == 2.0);

    auto zero = make_node(Tensor<double>({1, 1, 1, 1}, {0.0}), true);
    auto s = tape.sigmoid(zero);
    CHECK(s->value[0] == doctest::Approx(0.5));
    tape.backward(tape.sum(s));
    CHECK(zero->grad[0] == doctest::Approx(0.25));
}

TEST_CASE("sigmoid gradient matches central finite differences") {
    std::mt19937 rng(17);
    Tensor<double> input(1, 1, 4, 5);
    fill_uniform(input, rng, -2.0, 2.0);
    auto x = make_node(input, true);
    Tape<double> tape;
    tape.backward(tape.sum(tape.sigmoid(x)));

    const double eps = 1e-4;
    for (std::int64_t i = 0; i < input.size(); ++i) {
        auto f = [&](double v) { return 1.0 / (1.0 + std::exp(-v)); };
        const double fd = (f(input[i] + eps) - f(input[i] - eps)) / (2 * eps);
        CHECK(std::abs(x->grad[i] - fd) <= 1e-6);
    }
}

TEST_CASE("linear: identity, constant bias, loop reference") {
    std::mt19937 rng(19);
    Tensor<double> input(2, 4, 1, 1);
    fill_uniform(input, rng);

    Tensor<double> eye(4, 4, 1, 1);
    for (int i = 0; i < 4; ++i) eye.at(i, i, 0, 0) = 1.0;
    Tape<double> tape;
    auto y = tape.linear(make_node(input), make_node(eye), nullptr);
    CHECK(max_abs_diff(y->value, input) == 0.0);

    Tensor<double> bias({1, 3, 1, 1}, {0.5, -1.0, 2.0});
    auto z = tape.linear(make_node(input), make_node(Tensor<double>(3, 4, 1, 1)),
                         make_node(bias));
    for (int n = 0; n < 2; ++n) {
        for (int o = 0; o < 3; ++o) CHECK(z->value.at(n, o, 0, 0) == bias[o]);
    }

    Tensor<double> wt(3, 4, 1, 1);
    fill_uniform(wt, rng);
    auto v = tape.linear(make_node(input), make_node(wt), make_node(bias));
    for (int n = 0; n < 2; ++n) {
        for (int o = 0; o < 3; ++o) {
            double acc = bias[o];
            for (int i = 0; i < 4; ++i) acc += wt.at(o, i, 0, 0) * input.at(n, i, 0, 0);
            CHECK(std::abs(v->value.at(n, o, 0, 0) - acc) <= 1e-6);
        }
    }

    CHECK_THROWS_AS(tape.linear(make_node(Tensor<double>(1, 5, 1, 1)), make_node(wt),
                                nullptr),
                    std::invalid_argument);
}

TEST_CASE("global_avg_pool: constants and the summation oracle") {
    Tape<float> tape;
    auto c = tape.global_avg_pool(make_node(Tensor<float>::full({2, 3, 4, 4}, 2.5f)));
    for (std::int64_t i = 0; i < c->value.size(); ++i) CHECK(c->value[i] == 2.5f);

    auto quad = tape.global_avg_pool(
        make_node(Tensor<float>({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f})));
    CHECK(quad->value[0] == doctest::Approx(2.5f));

    std::mt19937 rng(23);
    Tensor<float> input(2, 3, 5, 7);
    fill_uniform(input, rng);
    auto y = tape.global_avg_pool(make_node(input));
    for (int n = 0; n < 2; ++n) {
        for (int ch = 0; ch < 3; ++ch) {
            double acc = 0;
            for (int i = 0; i < 5; ++i) {
                for (int j = 0; j < 7; ++j) acc += input.at(n, ch, i, j);
            }
            CHECK(std::abs(y->value.at(n, ch, 0, 0) - acc / 35.0) <= 1e-6);
        }
    }
}

TEST_CASE("pixel_shuffle: layout, bijectivity, permutation property") {
    Tape<float> tape;

    // Defining layout case.
    auto abcd = make_node(Tensor<float>({1, 4, 1, 1}, {1.0f, 2.0f, 3.0f, 4.0f}));
    auto y = tape.pixel_shuffle(abcd, 2);
    CHECK(y->value.shape() == Shape{1, 1, 2, 2});
    CHECK(y->value.at(0, 0, 0, 0) == 1.0f);
    CHECK(y->value.at(0, 0, 0, 1) == 2.0f);
    CHECK(y->value.at(0, 0, 1, 0) == 3.0f);
    CHECK(y->value.at(0, 0, 1, 1) == 4.0f);

    std::mt19937 rng(29);
    Tensor<float> input(2, 12, 3, 4);
    fill_uniform(input, rng);
    auto same = tape.pixel_shuffle(make_node(input), 1);
    CHECK(max_abs_diff(same->value, input) == 0.0);

    // Round trip through the inverse rearrangement is bit-exact.
    auto shuffled = tape.pixel_shuffle(make_node(input), 2);
    Tensor<float> recovered(input.shape());
    for (int n = 0; n < 2; ++n) {
        for (int c = 0; c < 3; ++c) {
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    for (int yy = 0; yy < 3; ++yy) {
                        for (int xx = 0; xx < 4; ++xx) {
                            recovered.at(n, c * 4 + dy * 2 + dx, yy, xx) =
                                shuffled->value.at(n, c, yy * 2 + dy, xx * 2 + dx);
                        }
                    }
                }
            }
        }
    }
    CHECK(max_abs_diff(recovered, input) == 0.0);

    // Permutation: sorted multisets agree exactly.
    std::vector<float> a(input.data(), input.data() + input.size());
    std::vector<float> b(shuffled->value.data(),
                         shuffled->value.data() + shuffled->value.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);

    CHECK_THROWS_AS(tape.pixel_shuffle(make_node(Tensor<float>(1, 3, 2, 2)), 2),
                    std::invalid_argument);
}

TEST_CASE("backward: quadratic loss, disconnected parameters, scalar contract") {
    std::mt19937 rng(31);
    Tensor<double> input(1, 2, 3, 3);
    fill_uniform(input, rng);
    auto x = make_node(input, true);
    auto unused = make_node(Tensor<double>(1, 1, 2, 2), true);

    Tape<double> tape;
    auto loss = tape.sum(tape.mul(x, x));
    tape.backward(loss);
    for (std::int64_t i = 0; i < input.size(); ++i) {
        CHECK(x->grad[i] == doctest::Approx(2.0 * input[i]));
    }
    for (std::int64_t i = 0; i < unused->grad.size(); ++i) {
        CHECK(unused->grad[i] == 0.0);
    }

    Tape<double> tape2;
    auto vec = tape2.mul(x, x);
    CHECK_THROWS_AS(tape2.backward(vec), std::invalid_argument);
}

TEST_CASE("backward: conv + MAE weight gradients match finite differences") {
    std::mt19937 rng(37);
    Tensor<double> input(2, 2, 6, 6), wt(3, 2, 3, 3), bias(1, 3, 1, 1), target(2, 3, 6, 6);
    fill_uniform(input, rng);
    fill_uniform(wt, rng);
    fill_uniform(bias, rng);
    fill_uniform(target, rng);
    ConvSpec spec{3, 1, 1, 2, 3, true};

    auto w_node = make_node(wt, true);
    auto b_node = make_node(bias, true);
    auto x_node = make_node(input, true);
    Tape<double> tape;
    auto loss = tape.mean_abs_error(
        tape.conv2d(x_node, w_node, b_node, spec), make_node(target));
    tape.backward(loss);

    auto loss_at = [&](const Tensor<double>& w_probe, const Tensor<double>& b_probe) {
        Tape<double> t(false);
        auto y = t.conv2d(make_node(input), make_node(w_probe), make_node(b_probe), spec);
        double acc = 0;
        for (std::int64_t i = 0; i < y->value.size(); ++i) {
            acc += std::abs(y->value[i] - target[i]);
        }
        return acc / static_cast<double>(y->value.size());
    };

    const double eps = 1e-3;
    std::uniform_int_distribution<std::int64_t> pick_w(0, wt.size() - 1);
    for (int k = 0; k < 20; ++k) {
        const std::int64_t i = pick_w(rng);
        Tensor<double> plus = wt, minus = wt;
        plus[i] += eps;
        minus[i] -= eps;
        const double fd = (loss_at(plus, bias) - loss_at(minus, bias)) / (2 * eps);
        const double ad = w_node->grad[i];
        CHECK(std::abs(ad - fd) <= 1e-3 * std::max(1.0, std::abs(fd)));
    }
    for (int o = 0; o < 3; ++o) {
        Tensor<double> plus = bias, minus = bias;
        plus[o] += eps;
        minus[o] -= eps;
        const double fd = (loss_at(wt, plus) - loss_at(wt, minus)) / (2 * eps);
        CHECK(std::abs(b_node->grad[o] - fd) <= 1e-3 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("deconv2d gradients match finite differences") {
    std::mt19937 rng(41);
    Tensor<double> input(1, 3, 5, 5), wt(3, 2, 3, 3), target(1, 2, 5, 5);
    fill_uniform(input, rng);
    fill_uniform(wt, rng);
    fill_uniform(target, rng);
    ConvSpec spec{3, 1, 1, 3, 2, false};

    auto w_node = make_node(wt, true);
    auto x_node = make_node(input, true);
    Tape<double> tape;
    auto loss = tape.mean_abs_error(tape.deconv2d(x_node, w_node, nullptr, spec),
                                    make_node(target));
    tape.backward(loss);

    auto loss_at = [&](const Tensor<double>& x_probe, const Tensor<double>& w_probe) {
        Tape<double> t(false);
        auto y = t.deconv2d(make_node(x_probe), make_node(w_probe), nullptr, spec);
        double acc = 0;
        for (std::int64_t i = 0; i < y->value.size(); ++i) {
            acc += std::abs(y->value[i] - target[i]);
        }
        return acc / static_cast<double>(y->value.size());
    };

    const double eps = 1e-3;
    std::uniform_int_distribution<std::int64_t> pick_w(0, wt.size() - 1);
    std::uniform_int_distribution<std::int64_t> pick_x(0, input.size() - 1);
    for (int k = 0; k < 10; ++k) {
        const std::int64_t i = pick_w(rng);
        Tensor<double> plus = wt, minus = wt;
        plus[i] += eps;
        minus[i] -= eps;
        const double fd = (loss_at(input, plus) - loss_at(input, minus)) / (2 * eps);
        CHECK(std::abs(w_node->grad[i] - fd) <= 1e-3 * std::max(1.0, std::abs(fd)));
    }
    for (int k = 0; k < 10; ++k) {
        const std::int64_t i = pick_x(rng);
        Tensor<double> plus = input, minus = input;
        plus[i] += eps;
        minus[i] -= eps;
        const double fd = (loss_at(plus, wt) - loss_at(minus, wt)) / (2 * eps);
        CHECK(std::abs(x_node->grad[i] - fd) <= 1e-3 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("adam: first step bound and zero-gradient stability") {
    auto p = make_node(Tensor<float>({1, 1, 1, 1}, {1.0f}), true);
    p->grad[0] = 0.7f;
    AdamOptimizer<float> opt;
    opt.step({p}, 0.01f);
    const float delta = p->value[0] - 1.0f;
    CHECK(delta < 0.0f);              // moves against the gradient
    CHECK(std::abs(delta) <= 0.01f);  // no further than lr

    p->grad[0] = 0.0f;
    const float before = p->value[0];
    opt.step({p}, 0.01f);
    // With a zero gradient both moments decay toward zero and the bias-
    // corrected update stays bounded by lr; the parameter barely moves.
    CHECK(std::abs(p->value[0] - before) <= 0.01f);

    auto q = make_node(Tensor<float>({1, 1, 1, 1}, {3.0f}), true);
    AdamOptimizer<float> fresh;
    fresh.step({q}, 0.01f);
    CHECK(q->value[0] == 3.0f);  // zero grad from the start: exactly no movement
}

TEST_CASE("adam: 100 steps on (p-3)^2 track the scalar recurrence") {
    auto p = make_node(Tensor<double>({1, 1, 1, 1}, {0.0}), true);
    AdamOptimizer<double> opt;

    // Independent scalar recurrence.
    double ref = 0.0, m = 0.0, v = 0.0;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.1;

    for (int t = 1; t <= 100; ++t) {
        Tape<double> tape;
        auto diff = tape.add_scalar(p, -3.0);
        auto loss = tape.sum(tape.mul(diff, diff));
        p->zero_grad();
        tape.backward(loss);
        opt.step({p}, lr);

        const double g = 2.0 * (ref - 3.0);
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        ref -= lr * mh / (std::sqrt(vh) + eps);
        CHECK(std::abs(p->value[0] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    CHECK(std::abs(p->value[0] - 3.0) < 0.5);
}

TEST_CASE("mean_abs_error: values and subgradient") {
    std::mt19937 rng(43);
    Tensor<double> a(1, 2, 3, 3), b(1, 2, 3, 3);
    fill_uniform(a, rng);
    b = a;
    Tape<double> tape;
    CHECK(tape.mean_abs_error(make_node(a), make_node(b))->value[0] == 0.0);

    Tensor<double> shifted = a;
    for (std::int64_t i = 0; i < shifted.size(); ++i) shifted[i] += 1.0;
    CHECK(tape.mean_abs_error(make_node(shifted), make_node(a))->value[0] ==
          doctest::Approx(1.0));

    // grad = sign(pred - target) / count away from ties.
    Tensor<double> target(1, 2, 3, 3);
    fill_uniform(target, rng);
    auto pred = make_node(a, true);
    Tape<double> t2;
    t2.backward(t2.mean_abs_error(pred, make_node(target)));
    const double count = static_cast<double>(a.size());
    for (std::int64_t i = 0; i < a.size(); ++i) {
        const double expect = (a[i] > target[i] ? 1.0 : (a[i] < target[i] ? -1.0 : 0.0)) / count;
        CHECK(pred->grad[i] == doctest::Approx(expect));
    }

    CHECK_THROWS_AS(
        t2.mean_abs_error(make_node(Tensor<double>(1, 1, 2, 2)), make_node(target)),
        std::invalid_argument);
}

TEST_CASE("elementwise op gradients pass spot finite-difference checks") {
    std::mt19937 rng(47);
    Tensor<double> base(1, 2, 4, 4);
    fill_uniform(base, rng, 0.5, 2.0);  // positive domain: valid for sqrt/recip

    struct Case {
        const char* name;
        std::function<NodeRef<double>(Tape<double>&, const NodeRef<double>&)> op;
        std::function<double(double)> ref;
    };
    const std::vector<Case> cases = {
        {"relu", [](Tape<double>& t, const NodeRef<double>& x) { return t.relu(x); },
         [](double v) { return v > 0 ? v : 0.0; }},
        {"sigmoid", [](Tape<double>& t, const NodeRef<double>& x) { return t.sigmoid(x); },
         [](double v) { return 1.0 / (1.0 + std::exp(-v)); }},
        {"sqrt", [](Tape<double>& t, const NodeRef<double>& x) { return t.sqrt(x); },
         [](double v) { return std::sqrt(v); }},
        {"recip", [](Tape<double>& t, const NodeRef<double>& x) { return t.recip(x); },
         [](double v) { return 1.0 / v; }},
    };

    for (const auto& c : cases) {
        CAPTURE(c.name);
        auto x = make_node(base, true);
        Tape<double> tape;
        tape.backward(tape.sum(c.op(tape, x)));
        const double eps = 1e-5;
        std::uniform_int_distribution<std::int64_t> pick(0, base.size() - 1);
        for (int k = 0; k < 20; ++k) {
            const std::int64_t i = pick(rng);
            const double fd = (c.ref(base[i] + eps) - c.ref(base[i] - eps)) / (2 * eps);
            CHECK(std::abs(x->grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}
