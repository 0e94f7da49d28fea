#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace eswp {

enum class LrSchedule { Constant, Cosine };

struct SgdConfig {
    double base_lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.0;
    LrSchedule schedule = LrSchedule::Cosine;

    void validate() const {
        if (!(base_lr > 0.0)) throw std::invalid_argument("SgdConfig: base_lr must be positive");
        if (!(momentum >= 0.0 && momentum < 1.0)) {
            throw std::invalid_argument("SgdConfig: momentum must lie in [0, 1)");
        }
        if (!(weight_decay >= 0.0)) {
            throw std::invalid_argument("SgdConfig: weight_decay must be non-negative");
        }
    }
};

inline double lr_at(const SgdConfig& cfg, std::size_t step, std::size_t total_steps) {
    if (step >= total_steps) throw std::invalid_argument("lr_at: step out of range");
    if (cfg.schedule == LrSchedule::Constant) return cfg.base_lr;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return cfg.base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac));
}

// Momentum SGD with L2 weight decay folded into the gradient:
//   v <- momentum * v + (g + wd * p);  p <- p - lr * v
inline void sgd_step(std::vector<double>& params, const std::vector<double>& grad,
                     std::vector<double>& velocity, const SgdConfig& cfg, double lr_now) {
    if (grad.size() != params.size() || velocity.size() != params.size()) {
        throw std::invalid_argument("sgd_step: shape mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw std::domain_error("sgd_step: non-finite gradient component");
        }
        velocity[i] = cfg.momentum * velocity[i] + (grad[i] + cfg.weight_decay * params[i]);
        params[i] -= lr_now * velocity[i];
    }
}

}  // namespace eswp
