#include <gtest/gtest.h>

#include <cmath>

#include "eswp/optim.hpp"

using namespace eswp;

TEST(Sgd, ConfigValidation) {
    SgdConfig c;
    c.base_lr = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.base_lr = 0.1;
    c.momentum = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.momentum = 0.9;
    c.weight_decay = -1e-3;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.weight_decay = 0.0;
    EXPECT_NO_THROW(c.validate());
}

TEST(Sgd, ConstantSchedule) {
    SgdConfig c;
    c.base_lr = 0.3;
    c.schedule = LrSchedule::Constant;
    EXPECT_DOUBLE_EQ(lr_at(c, 0, 10), 0.3);
    EXPECT_DOUBLE_EQ(lr_at(c, 9, 10), 0.3);
}

TEST(Sgd, CosineSchedule) {
    SgdConfig c;
    c.base_lr = 1.0;
    c.schedule = LrSchedule::Cosine;
    EXPECT_DOUBLE_EQ(lr_at(c, 0, 100), 1.0);                  // starts at base
    EXPECT_NEAR(lr_at(c, 50, 100), 0.5, 1e-12);               // halfway
    EXPECT_NEAR(lr_at(c, 99, 100), 0.5 * (1.0 + std::cos(M_PI * 0.99)), 1e-12);
    // monotone decreasing
    double prev = lr_at(c, 0, 100);
    for (std::size_t s = 1; s < 100; ++s) {
        const double cur = lr_at(c, s, 100);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
    EXPECT_THROW(lr_at(c, 100, 100), std::invalid_argument);
}

TEST(Sgd, StepHandComputed) {
    // v <- 0.5*v + (g + 0.1*p); p <- p - 0.2*v
    SgdConfig c;
    c.momentum = 0.5;
    c.weight_decay = 0.1;
    std::vector<double> p = {1.0};
    std::vector<double> v = {2.0};
    sgd_step(p, {3.0}, v, c, 0.2);
    // v = 0.5*2 + (3 + 0.1*1) = 4.1; p = 1 - 0.2*4.1 = 0.18
    EXPECT_NEAR(v[0], 4.1, 1e-15);
    EXPECT_NEAR(p[0], 0.18, 1e-15);
}

TEST(Sgd, PlainGdWhenMomentumZero) {
    SgdConfig c;
    c.momentum = 0.0;
    c.weight_decay = 0.0;
    std::vector<double> p = {2.0, -1.0};
    std::vector<double> v = {0.0, 0.0};
    sgd_step(p, {0.5, -0.25}, v, c, 0.1);
    EXPECT_NEAR(p[0], 1.95, 1e-15);
    EXPECT_NEAR(p[1], -0.975, 1e-15);
}

TEST(Sgd, RejectsShapeMismatchAndNonFinite) {
    SgdConfig c;
    std::vector<double> p = {1.0};
    std::vector<double> v = {0.0};
    EXPECT_THROW(sgd_step(p, {1.0, 2.0}, v, c, 0.1), std::invalid_argument);
    EXPECT_THROW(sgd_step(p, {std::nan("")}, v, c, 0.1), std::domain_error);
}

TEST(Sgd, QuadraticConverges) {
    // minimize 0.5*x^2: gradient x, momentum SGD with cosine decay.
    SgdConfig c;
    c.base_lr = 0.3;
    c.momentum = 0.9;
    c.schedule = LrSchedule::Cosine;
    std::vector<double> p = {5.0};
    std::vector<double> v = {0.0};
    const std::size_t total = 200;
    for (std::size_t s = 0; s < total; ++s) {
        sgd_step(p, {p[0]}, v, c, lr_at(c, s, total));
    }
    EXPECT_LT(std::abs(p[0]), 1e-3);
}
