#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eswp {

// Hyper-parameters of the two-EMA weight recursion:
//   w(t) = beta1 * s(t-1) + (1 - beta1) * loss(t)
//   s(t) = beta2 * s(t-1) + (1 - beta2) * loss(t)
// beta1 = beta2 = 0 degenerates to loss-proportional weights, and
// beta1 = beta2 = 1 freezes the state at its initialization.
struct BetaParams {
    double beta1 = 0.2;
    double beta2 = 0.9;

    BetaParams() = default;
    BetaParams(double b1, double b2) : beta1(b1), beta2(b2) {
        if (!(b1 >= 0.0 && b1 <= 1.0) || !(b2 >= 0.0 && b2 <= 1.0)) {
            throw std::invalid_argument("BetaParams: betas must lie in [0, 1], got (" +
                                        std::to_string(b1) + ", " + std::to_string(b2) + ")");
        }
    }
};

enum class StrategyKind {
    Uniform,
    Loss,
    Order,
    ES,
    ESWP,
    NonDif,
    RandomPrune,
};

inline const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Uniform: return "uniform";
        case StrategyKind::Loss: return "loss";
        case StrategyKind::Order: return "order";
        case StrategyKind::ES: return "es";
        case StrategyKind::ESWP: return "eswp";
        case StrategyKind::NonDif: return "nondif";
        case StrategyKind::RandomPrune: return "random_prune";
    }
    return "?";
}

struct Strategy {
    StrategyKind kind = StrategyKind::Uniform;
    BetaParams betas{};

    Strategy() = default;
    Strategy(StrategyKind k, BetaParams b = BetaParams{}) : kind(k), betas(b) {
        switch (k) {
            case StrategyKind::Loss:
                betas = BetaParams(0.0, 0.0);  // loss scheme == ES with betas (0,0)
                break;
            case StrategyKind::NonDif:
                if (b.beta1 != b.beta2) {
                    throw std::invalid_argument("Strategy: NonDif requires beta1 == beta2");
                }
                break;
            case StrategyKind::Uniform:
            case StrategyKind::Order:
            case StrategyKind::RandomPrune:
                betas = BetaParams{};  // ignored
                break;
            default:
                break;
        }
    }

    // Whether the per-step meta-batch forward pass feeds the sampler state.
    bool updates_state() const {
        return kind == StrategyKind::Loss || kind == StrategyKind::ES ||
               kind == StrategyKind::ESWP || kind == StrategyKind::NonDif;
    }
    // Whether a mini-batch is selected from the meta-batch outside annealing.
    bool selects_minibatch() const {
        return kind == StrategyKind::Loss || kind == StrategyKind::Order ||
               kind == StrategyKind::ES || kind == StrategyKind::ESWP ||
               kind == StrategyKind::NonDif;
    }
    bool prunes() const {
        return kind == StrategyKind::ESWP || kind == StrategyKind::RandomPrune;
    }
};

// Evolving per-sample score/weight memory. One entry per sample; only
// samples seen in the current meta-batch are touched, everything else
// keeps stale state. Single-writer: concurrent reads are fine with no
// writer active, mutation needs external exclusion.
struct SamplerState {
    std::size_t n = 0;
    std::vector<double> scores;
    std::vector<double> weights;
    std::vector<std::int64_t> last_update_step;
};

inline SamplerState init_state(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("init_state: dataset size must be positive");
    }
    SamplerState st;
    st.n = n;
    st.scores.assign(n, 1.0 / static_cast<double>(n));
    st.weights.assign(n, 1.0 / static_cast<double>(n));
    st.last_update_step.assign(n, 0);
    return st;
}

// One recursion step for sample `id`. The weight reads the *old* score.
inline void update_sample(SamplerState& state, std::size_t id, double loss,
                          const BetaParams& betas, std::int64_t step = 0) {
    if (id >= state.n) {
        throw std::invalid_argument("update_sample: sample id " + std::to_string(id) +
                                    " out of range [0, " + std::to_string(state.n) + ")");
    }
    if (!std::isfinite(loss) || loss < 0.0) {
        throw std::domain_error("update_sample: loss for sample " + std::to_string(id) +
                                " is negative or non-finite");
    }
    const double s_old = state.scores[id];
    state.weights[id] = betas.beta1 * s_old + (1.0 - betas.beta1) * loss;
    state.scores[id] = betas.beta2 * s_old + (1.0 - betas.beta2) * loss;
    state.last_update_step[id] = step;
}

// Normalized selection probabilities over `ids`, with a floor applied to
// each weight first so no sample becomes permanently unselectable.
inline std::vector<double> probability_snapshot(const SamplerState& state,
                                                const std::vector<std::size_t>& ids,
                                                double floor = 1e-12) {
    if (ids.empty()) {
        throw std::invalid_argument("probability_snapshot: empty id set");
    }
    if (!(floor > 0.0)) {
        throw std::invalid_argument("probability_snapshot: floor must be positive");
    }
    std::vector<double> p(ids.size());
    double total = 0.0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (ids[j] >= state.n) {
            throw std::invalid_argument("probability_snapshot: sample id out of range");
        }
        p[j] = std::max(state.weights[ids[j]], floor);
        total += p[j];
    }
    for (double& v : p) v /= total;
    return p;
}

}  // namespace eswp
