#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "eswp/model.hpp"

using namespace eswp;

namespace {

double mean_loss(const ModelParams& p, const Batch& b) {
    const std::vector<double> losses = forward_losses(p, b);
    return std::accumulate(losses.begin(), losses.end(), 0.0) /
           static_cast<double>(b.rows);
}

Batch random_batch(const ModelDescriptor& d, std::size_t rows, Rng& rng) {
    Batch b;
    b.rows = rows;
    b.dim = d.input_dim;
    b.features.resize(rows * d.input_dim);
    for (double& v : b.features) v = rng.normal();
    b.ids.resize(rows);
    std::iota(b.ids.begin(), b.ids.end(), 0);
    if (d.kind == ModelKind::Linear) {
        b.targets.resize(rows * d.outputs);
        for (double& v : b.targets) v = rng.normal();
    } else {
        b.labels.resize(rows);
        for (int& y : b.labels) y = static_cast<int>(rng.below(d.outputs));
    }
    return b;
}

// Central finite differences against backward(); relative error in the
// 2-norm.
double grad_check(const ModelDescriptor& d, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, 0);
    ModelParams p = init_params(d, rng);
    const Batch b = random_batch(d, 7, rng);
    const std::vector<double> g = backward(p, b);
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double keep = p.values[i];
        p.values[i] = keep + h;
        const double up = mean_loss(p, b);
        p.values[i] = keep - h;
        const double dn = mean_loss(p, b);
        p.values[i] = keep;
        const double fd = (up - dn) / (2.0 * h);
        num += (fd - g[i]) * (fd - g[i]);
        den += fd * fd;
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace

TEST(Model, ParamCounts) {
    EXPECT_EQ((ModelDescriptor{ModelKind::Linear, 5, 0, 1}).param_count(), 6u);
    EXPECT_EQ((ModelDescriptor{ModelKind::Logistic, 5, 0, 3}).param_count(), 18u);
    EXPECT_EQ((ModelDescriptor{ModelKind::Mlp, 4, 8, 3}).param_count(),
              4u * 8 + 8 + 3 * 8 + 3);
}

TEST(Model, InitWithinFanInBound) {
    const ModelDescriptor d{ModelKind::Logistic, 16, 0, 4};
    Rng rng(1);
    const ModelParams p = init_params(d, rng);
    const double bound = 1.0 / 4.0;
    for (double v : p.values) {
        EXPECT_LE(std::abs(v), bound);
    }
}

TEST(Model, LinearLossHandComputed) {
    // f(x) = w x + b with w=2, b=1; x=3, y=5 -> f=7, loss = 0.5*(7-5)^2 = 2
    ModelParams p{{ModelKind::Linear, 1, 0, 1}, {2.0, 1.0}};
    Batch b;
    b.rows = 1;
    b.dim = 1;
    b.features = {3.0};
    b.targets = {5.0};
    EXPECT_DOUBLE_EQ(forward_losses(p, b)[0], 2.0);
}

TEST(Model, SoftmaxLossAtZeroLogitsIsLogC) {
    ModelParams p = zero_params({ModelKind::Logistic, 3, 0, 5});
    Batch b;
    b.rows = 2;
    b.dim = 3;
    b.features = {1.0, -2.0, 0.5, 0.0, 0.0, 0.0};
    b.labels = {4, 0};
    const auto losses = forward_losses(p, b);
    EXPECT_NEAR(losses[0], std::log(5.0), 1e-12);
    EXPECT_NEAR(losses[1], std::log(5.0), 1e-12);
}

TEST(Model, SoftmaxStableUnderLargeLogits) {
    // Huge weights produce huge logits; log-sum-exp must stay finite.
    ModelParams p{{ModelKind::Logistic, 1, 0, 2}, {500.0, -500.0, 0.0, 0.0}};
    Batch b;
    b.rows = 1;
    b.dim = 1;
    b.features = {2.0};
    b.labels = {0};
    EXPECT_NEAR(forward_losses(p, b)[0], 0.0, 1e-12);
}

TEST(Model, GradLinear) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        EXPECT_LT(grad_check({ModelKind::Linear, 6, 0, 3}, s), 1e-6) << "seed " << s;
    }
}

TEST(Model, GradLogistic) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        EXPECT_LT(grad_check({ModelKind::Logistic, 5, 0, 4}, 100 + s), 1e-6) << "seed " << s;
    }
}

TEST(Model, GradMlp) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        EXPECT_LT(grad_check({ModelKind::Mlp, 4, 6, 3}, 200 + s), 1e-6) << "seed " << s;
    }
}

TEST(Model, GradIndependentOfRowOrder) {
    // Accumulation happens in ascending sample-id order, so permuting rows
    // must reproduce the gradient bit for bit.
    const ModelDescriptor d{ModelKind::Logistic, 4, 0, 3};
    Rng rng(77);
    const ModelParams p = init_params(d, rng);
    Batch b = random_batch(d, 6, rng);
    b.ids = {5, 0, 3, 1, 4, 2};
    const std::vector<double> g1 = backward(p, b);

    Batch b2 = b;  // rows permuted into ascending id order
    std::vector<std::size_t> order = {1, 3, 5, 2, 4, 0};
    for (std::size_t r = 0; r < 6; ++r) {
        const std::size_t src = order[r];
        std::copy_n(b.features.begin() + static_cast<std::ptrdiff_t>(src * 4), 4,
                    b2.features.begin() + static_cast<std::ptrdiff_t>(r * 4));
        b2.labels[r] = b.labels[src];
        b2.ids[r] = b.ids[src];
    }
    const std::vector<double> g2 = backward(p, b2);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_EQ(g1[i], g2[i]);
}

TEST(Model, PredictArgmaxWithLowTieBreak) {
    // Zero params give all-equal logits: everything predicts class 0.
    ModelParams p = zero_params({ModelKind::Logistic, 2, 0, 4});
    const std::vector<double> x = {1.0, 2.0, -1.0, 0.0};
    const auto pred = predict(p, x, 2);
    EXPECT_EQ(pred[0], 0);
    EXPECT_EQ(pred[1], 0);
}

TEST(Model, AccuracyCounts) {
    ModelParams p = zero_params({ModelKind::Logistic, 2, 0, 3});
    const std::vector<double> x = {1.0, 0.0, 0.0, 1.0};
    EXPECT_DOUBLE_EQ(accuracy(p, x, {0, 1}), 0.5);
}

TEST(Model, ShapeValidation) {
    ModelParams p = zero_params({ModelKind::Logistic, 3, 0, 2});
    Batch b;
    b.rows = 1;
    b.dim = 2;  // wrong
    b.features = {1.0, 2.0};
    b.labels = {0};
    EXPECT_THROW(forward_losses(p, b), std::invalid_argument);
}
