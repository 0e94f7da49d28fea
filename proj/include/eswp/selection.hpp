#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <stdexcept>
#include <vector>

#include "eswp/rng.hpp"
#include "eswp/sampler.hpp"

namespace eswp {

// Annealing schedule: selection is disabled (standard batched training)
// during the first `start_epochs` and the last `end_epochs` of a run.
struct AnnealWindow {
    std::size_t start_epochs = 0;
    std::size_t end_epochs = 0;
    std::size_t total_epochs = 1;

    AnnealWindow() = default;
    AnnealWindow(std::size_t start, std::size_t end, std::size_t total)
        : start_epochs(start), end_epochs(end), total_epochs(total) {
        if (total == 0 || start + end > total) {
            throw std::invalid_argument("AnnealWindow: need start + end <= total and total >= 1");
        }
    }
};

struct PruneConfig {
    double ratio = 0.0;  // fraction of the dataset removed per epoch

    PruneConfig() = default;
    explicit PruneConfig(double r) : ratio(r) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw std::invalid_argument("PruneConfig: ratio must lie in [0, 1)");
        }
    }
};

// True iff `epoch` falls in an annealing phase (no data selection).
inline bool annealing_active(std::size_t epoch, const AnnealWindow& window) {
    if (epoch >= window.total_epochs) {
        throw std::invalid_argument("annealing_active: epoch out of range");
    }
    return epoch < window.start_epochs ||
           epoch >= window.total_epochs - window.end_epochs;
}

// Weighted sampling without replacement via exponential keys: draw
// key_i = -log(u_i) / p_i and keep the k smallest. One pass, fixed
// per-item probabilities (no renormalization between draws); ties break
// toward the lower index so replays are deterministic.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    const std::vector<double>& probabilities, std::size_t k, Rng& rng) {
    const std::size_t m = probabilities.size();
    if (k > m) {
        throw std::invalid_argument("weighted_sample_without_replacement: k > m");
    }
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument(
                "weighted_sample_without_replacement: invalid distribution (negative or "
                "non-finite entry)");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "weighted_sample_without_replacement: probabilities sum to " +
            std::to_string(total) + ", not 1");
    }
    if (k == 0) return {};

    std::vector<std::pair<double, std::size_t>> keyed(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double u = rng.u01();
        const double key = probabilities[i] > 0.0
                               ? -std::log(u) / probabilities[i]
                               : std::numeric_limits<double>::infinity();
        keyed[i] = {key, i};
    }
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k),
                      keyed.end());
    std::vector<std::size_t> out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = keyed[j].second;
    return out;
}

// Draw the mini-batch (size b) from a meta-batch with probabilities taken
// from the current sampler weights.
inline std::vector<std::size_t> select_minibatch(const SamplerState& state,
                                                 const std::vector<std::size_t>& meta_ids,
                                                 std::size_t b, Rng& rng,
                                                 double floor = 1e-12) {
    if (b > meta_ids.size()) {
        throw std::invalid_argument("select_minibatch: b exceeds meta-batch size");
    }
    if (b == meta_ids.size()) return meta_ids;
    const std::vector<double> p = probability_snapshot(state, meta_ids, floor);
    const std::vector<std::size_t> picked = weighted_sample_without_replacement(p, b, rng);
    std::vector<std::size_t> out(picked.size());
    for (std::size_t j = 0; j < picked.size(); ++j) out[j] = meta_ids[picked[j]];
    return out;
}

// Epoch-level pruning: keep floor((1 - r) * n) samples, drawn without
// replacement proportional to current weights. Pruned samples keep their
// state and re-enter the lottery next epoch.
inline std::vector<std::size_t> prune_epoch(const SamplerState& state,
                                            const std::vector<std::size_t>& all_ids,
                                            const PruneConfig& cfg, Rng& rng,
                                            double floor = 1e-12) {
    const std::size_t keep = static_cast<std::size_t>(
        std::floor((1.0 - cfg.ratio) * static_cast<double>(all_ids.size())));
    if (keep == all_ids.size()) return all_ids;
    const std::vector<double> p = probability_snapshot(state, all_ids, floor);
    const std::vector<std::size_t> picked = weighted_sample_without_replacement(p, keep, rng);
    std::vector<std::size_t> out(picked.size());
    for (std::size_t j = 0; j < picked.size(); ++j) out[j] = all_ids[picked[j]];
    return out;
}

// Uniform pruning for the RandomPrune ablation.
inline std::vector<std::size_t> prune_epoch_uniform(const std::vector<std::size_t>& all_ids,
                                                    const PruneConfig& cfg, Rng& rng) {
    const std::size_t keep = static_cast<std::size_t>(
        std::floor((1.0 - cfg.ratio) * static_cast<double>(all_ids.size())));
    if (keep == all_ids.size()) return all_ids;
    std::vector<double> p(all_ids.size(), 1.0 / static_cast<double>(all_ids.size()));
    const std::vector<std::size_t> picked = weighted_sample_without_replacement(p, keep, rng);
    std::vector<std::size_t> out(picked.size());
    for (std::size_t j = 0; j < picked.size(); ++j) out[j] = all_ids[picked[j]];
    return out;
}

}  // namespace eswp
