#pragma once

#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswp/data.hpp"
#include "eswp/model.hpp"
#include "eswp/optim.hpp"
#include "eswp/rng.hpp"
#include "eswp/sampler.hpp"
#include "eswp/selection.hpp"

namespace eswp {

struct TrainConfig {
    Strategy strategy{};
    std::size_t meta_batch = 128;
    std::size_t mini_batch = 32;
    PruneConfig prune{};
    AnnealWindow anneal{};
    std::size_t epochs = 1;
    SgdConfig optimizer{};
    std::uint64_t seed = 0;
    ModelDescriptor model{};
    double prob_floor = 1e-12;
    bool record_timing = true;  // off -> epoch_seconds written as 0 (reproducible output)

    void validate(const IndexedDataset& train) const {
        if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
        if (mini_batch == 0 || meta_batch == 0) {
            throw std::invalid_argument("TrainConfig: batch sizes must be positive");
        }
        if (mini_batch > meta_batch) {
            throw std::invalid_argument("TrainConfig: mini_batch exceeds meta_batch");
        }
        if (meta_batch > train.n) {
            throw std::invalid_argument("TrainConfig: meta_batch exceeds dataset size");
        }
        if (anneal.total_epochs != epochs) {
            throw std::invalid_argument("TrainConfig: anneal window total differs from epochs");
        }
        if (model.input_dim != train.dim) {
            throw std::invalid_argument("TrainConfig: model input dim differs from dataset dim");
        }
        if (model.kind != ModelKind::Linear && model.outputs != train.classes) {
            throw std::invalid_argument("TrainConfig: model outputs differ from class count");
        }
        optimizer.validate();
    }
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_acc = 0.0;
    double seconds = 0.0;
    std::uint64_t cum_fp_samples = 0;
    std::uint64_t cum_bp_samples = 0;
    std::uint64_t cum_updates = 0;
};

struct RunMetrics {
    std::vector<EpochMetrics> epochs;

    std::uint64_t fp_samples() const { return epochs.empty() ? 0 : epochs.back().cum_fp_samples; }
    std::uint64_t bp_samples() const { return epochs.empty() ? 0 : epochs.back().cum_bp_samples; }
    std::uint64_t updates() const { return epochs.empty() ? 0 : epochs.back().cum_updates; }
};

// Everything needed to continue a run bit-exactly.
struct Checkpoint {
    ModelParams params;
    std::vector<double> velocity;
    SamplerState sampler;
    std::string rng_shuffle;
    std::string rng_select;
    std::string rng_prune;
    std::uint64_t next_epoch = 0;
    std::uint64_t global_step = 0;
    RunMetrics metrics;
};

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

inline EvalResult evaluate(const ModelParams& params, const IndexedDataset& test) {
    Batch batch;
    batch.rows = test.n;
    batch.dim = test.dim;
    batch.features = test.features;
    batch.ids = test.ids;
    if (params.desc.kind == ModelKind::Linear) {
        batch.targets.resize(test.n * params.desc.outputs, 0.0);
        for (std::size_t i = 0; i < test.n; ++i) {
            batch.targets[i * params.desc.outputs] = static_cast<double>(test.labels[i]);
        }
    } else {
        batch.labels = test.labels;
    }
    const std::vector<double> losses = forward_losses(params, batch);
    EvalResult out;
    out.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
                    static_cast<double>(std::max<std::size_t>(test.n, 1));
    out.accuracy = accuracy(params, test.features, test.labels);
    return out;
}

// BP passes per update step under gradient accumulation with micro-batch
// size b_micro: full meta-batch vs selected mini-batch.
inline std::pair<std::uint64_t, std::uint64_t> bp_pass_count(std::uint64_t B, std::uint64_t b,
                                                             std::uint64_t b_micro) {
    if (B == 0 || b == 0 || b_micro == 0) {
        throw std::invalid_argument("bp_pass_count: all arguments must be positive");
    }
    return {(B + b_micro - 1) / b_micro, (b + b_micro - 1) / b_micro};
}

struct TrainResult {
    RunMetrics metrics;
    ModelParams params;
    SamplerState sampler;
    Checkpoint checkpoint;  // state at loop exit, resumable
};

struct RunOptions {
    const Checkpoint* resume = nullptr;
    std::optional<std::size_t> stop_after_epoch;  // run epochs [start, stop)
    std::vector<std::vector<std::size_t>>* selection_log = nullptr;  // BP ids per step
};

namespace detail {

inline Batch gather_batch(const IndexedDataset& ds, const std::vector<std::size_t>& ids,
                          const ModelDescriptor& model) {
    Batch b;
    b.rows = ids.size();
    b.dim = ds.dim;
    b.ids = ids;
    b.features.resize(ids.size() * ds.dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        std::copy_n(ds.features.begin() + static_cast<std::ptrdiff_t>(ids[r] * ds.dim), ds.dim,
                    b.features.begin() + static_cast<std::ptrdiff_t>(r * ds.dim));
    }
    if (model.kind == ModelKind::Linear) {
        b.targets.resize(ids.size() * model.outputs, 0.0);
        for (std::size_t r = 0; r < ids.size(); ++r) {
            b.targets[r * model.outputs] = static_cast<double>(ds.labels[ids[r]]);
        }
    } else {
        b.labels.resize(ids.size());
        for (std::size_t r = 0; r < ids.size(); ++r) b.labels[r] = ds.labels[ids[r]];
    }
    return b;
}

inline std::size_t epoch_pool_size(const TrainConfig& cfg, std::size_t n, std::size_t epoch) {
    if (cfg.strategy.prunes() && !annealing_active(epoch, cfg.anneal)) {
        return static_cast<std::size_t>(
            std::floor((1.0 - cfg.prune.ratio) * static_cast<double>(n)));
    }
    return n;
}

}  // namespace detail

// Total optimizer steps of a run, known up front (the pruning/annealing
// schedule fixes every epoch's pool size).
inline std::size_t total_step_count(const TrainConfig& cfg, std::size_t n) {
    std::size_t total = 0;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const std::size_t pool = detail::epoch_pool_size(cfg, n, e);
        total += (pool + cfg.meta_batch - 1) / cfg.meta_batch;
    }
    return total;
}

// Runs the full training loop: optional epoch-level pruning, per-step
// meta-batch scoring, sampler updates, mini-batch selection, and one
// optimizer step per training step. Deterministic given the config seed.
inline TrainResult run_training(const TrainConfig& cfg, const IndexedDataset& train,
                                const IndexedDataset& test, const RunOptions& opts = {}) {
    cfg.validate(train);
    const std::size_t n = train.n;
    const std::size_t total_steps = total_step_count(cfg, n);
    const Strategy& strat = cfg.strategy;

    ModelParams params;
    std::vector<double> velocity;
    SamplerState sampler;
    Rng shuffle_rng(0), select_rng(0), prune_rng(0);
    std::size_t start_epoch = 0;
    std::uint64_t global_step = 0;
    RunMetrics metrics;
    std::uint64_t cum_fp = 0, cum_bp = 0, cum_updates = 0;

    if (opts.resume) {
        const Checkpoint& ck = *opts.resume;
        params = ck.params;
        velocity = ck.velocity;
        sampler = ck.sampler;
        shuffle_rng = Rng::deserialize(ck.rng_shuffle);
        select_rng = Rng::deserialize(ck.rng_select);
        prune_rng = Rng::deserialize(ck.rng_prune);
        start_epoch = ck.next_epoch;
        global_step = ck.global_step;
        metrics = ck.metrics;
        if (!metrics.epochs.empty()) {
            cum_fp = metrics.epochs.back().cum_fp_samples;
            cum_bp = metrics.epochs.back().cum_bp_samples;
            cum_updates = metrics.epochs.back().cum_updates;
        }
        if (params.desc.param_count() != params.values.size() || sampler.n != n) {
            throw std::invalid_argument("run_training: checkpoint does not match config");
        }
    } else {
        Rng init_rng = Rng::derive(cfg.seed, 0);
        params = init_params(cfg.model, init_rng);
        velocity.assign(params.values.size(), 0.0);
        sampler = init_state(n);
        shuffle_rng = Rng::derive(cfg.seed, 1);
        select_rng = Rng::derive(cfg.seed, 2);
        prune_rng = Rng::derive(cfg.seed, 3);
    }

    std::vector<std::size_t> all_ids(n);
    std::iota(all_ids.begin(), all_ids.end(), 0);

    const std::size_t end_epoch = std::min<std::size_t>(
        cfg.epochs, opts.stop_after_epoch.value_or(cfg.epochs));

    for (std::size_t e = start_epoch; e < end_epoch; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const bool annealing = annealing_active(e, cfg.anneal);

        std::vector<std::size_t> pool = all_ids;
        if (strat.prunes() && !annealing) {
            pool = strat.kind == StrategyKind::RandomPrune
                       ? prune_epoch_uniform(all_ids, cfg.prune, prune_rng)
                       : prune_epoch(sampler, all_ids, cfg.prune, prune_rng, cfg.prob_floor);
        }
        for (std::size_t i = pool.size(); i > 1; --i) {  // Fisher-Yates
            std::swap(pool[i - 1], pool[shuffle_rng.below(i)]);
        }

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t begin = 0; begin < pool.size(); begin += cfg.meta_batch) {
            const std::size_t meta_size = std::min(cfg.meta_batch, pool.size() - begin);
            const std::vector<std::size_t> meta_ids(pool.begin() + static_cast<std::ptrdiff_t>(begin),
                                                    pool.begin() + static_cast<std::ptrdiff_t>(begin + meta_size));
            const Batch meta = detail::gather_batch(train, meta_ids, cfg.model);
            const std::vector<double> losses = forward_losses(params, meta);
            cum_fp += meta_size;
            loss_sum += std::accumulate(losses.begin(), losses.end(), 0.0);
            loss_count += meta_size;

            if (strat.updates_state()) {
                for (std::size_t r = 0; r < meta_size; ++r) {
                    update_sample(sampler, meta_ids[r], losses[r], strat.betas,
                                  static_cast<std::int64_t>(global_step) + 1);
                }
            }

            std::vector<std::size_t> bp_ids;
            if (annealing || !strat.selects_minibatch()) {
                bp_ids = meta_ids;
            } else if (strat.kind == StrategyKind::Order) {
                // top-b by current loss, ties toward the lower sample id
                const std::size_t b = std::min(cfg.mini_batch, meta_size);
                std::vector<std::size_t> order(meta_size);
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                    if (losses[x] != losses[y]) return losses[x] > losses[y];
                    return meta_ids[x] < meta_ids[y];
                });
                bp_ids.reserve(b);
                for (std::size_t j = 0; j < b; ++j) bp_ids.push_back(meta_ids[order[j]]);
            } else {
                bp_ids = select_minibatch(sampler, meta_ids, std::min(cfg.mini_batch, meta_size),
                                          select_rng, cfg.prob_floor);
            }
            if (opts.selection_log) opts.selection_log->push_back(bp_ids);
            cum_bp += bp_ids.size();

            const Batch mini = detail::gather_batch(train, bp_ids, cfg.model);
            const std::vector<double> grad = backward(params, mini);
            const double lr = lr_at(cfg.optimizer, global_step, total_steps);
            sgd_step(params.values, grad, velocity, cfg.optimizer, lr);
            ++cum_updates;
            ++global_step;
        }

        EpochMetrics em;
        em.epoch = e;
        em.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        em.test_acc = evaluate(params, test).accuracy;
        em.cum_fp_samples = cum_fp;
        em.cum_bp_samples = cum_bp;
        em.cum_updates = cum_updates;
        if (cfg.record_timing) {
            em.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        metrics.epochs.push_back(em);
    }

    TrainResult out;
    out.metrics = metrics;
    out.params = params;
    out.sampler = sampler;
    out.checkpoint.params = params;
    out.checkpoint.velocity = velocity;
    out.checkpoint.sampler = sampler;
    out.checkpoint.rng_shuffle = shuffle_rng.serialize();
    out.checkpoint.rng_select = select_rng.serialize();
    out.checkpoint.rng_prune = prune_rng.serialize();
    out.checkpoint.next_epoch = end_epoch;
    out.checkpoint.global_step = global_step;
    out.checkpoint.metrics = metrics;
    return out;
}

// --- checkpoint container: magic "ESWP1", version, little-endian lengths ---

namespace detail {

constexpr char kCheckpointMagic[5] = {'E', 'S', 'W', 'P', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw FormatError("checkpoint truncated while reading integer");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void put_doubles(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double x : v) put_f64(out, x);
}

inline std::vector<double> get_doubles(std::istream& in) {
    const std::uint64_t count = get_u64(in);
    std::vector<double> v(count);
    for (auto& x : v) x = get_f64(in);
    return v;
}

inline void put_string(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
    const std::uint64_t len = get_u64(in);
    std::string s(len, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
        throw FormatError("checkpoint truncated while reading string");
    }
    return s;
}

}  // namespace detail

inline void checkpoint_save(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint: " + path);
    out.write(detail::kCheckpointMagic, 5);
    detail::put_u64(out, detail::kCheckpointVersion);

    detail::put_u64(out, static_cast<std::uint64_t>(ck.params.desc.kind));
    detail::put_u64(out, ck.params.desc.input_dim);
    detail::put_u64(out, ck.params.desc.hidden_dim);
    detail::put_u64(out, ck.params.desc.outputs);
    detail::put_doubles(out, ck.params.values);
    detail::put_doubles(out, ck.velocity);

    detail::put_u64(out, ck.sampler.n);
    detail::put_doubles(out, ck.sampler.scores);
    detail::put_doubles(out, ck.sampler.weights);
    detail::put_u64(out, ck.sampler.last_update_step.size());
    for (auto s : ck.sampler.last_update_step) {
        detail::put_u64(out, static_cast<std::uint64_t>(s));
    }

    detail::put_string(out, ck.rng_shuffle);
    detail::put_string(out, ck.rng_select);
    detail::put_string(out, ck.rng_prune);
    detail::put_u64(out, ck.next_epoch);
    detail::put_u64(out, ck.global_step);

    detail::put_u64(out, ck.metrics.epochs.size());
    for (const EpochMetrics& em : ck.metrics.epochs) {
        detail::put_u64(out, em.epoch);
        detail::put_f64(out, em.train_loss);
        detail::put_f64(out, em.test_acc);
        detail::put_f64(out, em.seconds);
        detail::put_u64(out, em.cum_fp_samples);
        detail::put_u64(out, em.cum_bp_samples);
        detail::put_u64(out, em.cum_updates);
    }
}

inline Checkpoint checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, detail::kCheckpointMagic, 5) != 0) {
        throw FormatError("bad checkpoint magic in " + path);
    }
    const std::uint64_t version = detail::get_u64(in);
    if (version != detail::kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ck;
    ck.params.desc.kind = static_cast<ModelKind>(detail::get_u64(in));
    ck.params.desc.input_dim = detail::get_u64(in);
    ck.params.desc.hidden_dim = detail::get_u64(in);
    ck.params.desc.outputs = detail::get_u64(in);
    ck.params.values = detail::get_doubles(in);
    ck.velocity = detail::get_doubles(in);

    ck.sampler.n = detail::get_u64(in);
    ck.sampler.scores = detail::get_doubles(in);
    ck.sampler.weights = detail::get_doubles(in);
    const std::uint64_t steps = detail::get_u64(in);
    ck.sampler.last_update_step.resize(steps);
    for (auto& s : ck.sampler.last_update_step) {
        s = static_cast<std::int64_t>(detail::get_u64(in));
    }
    if (ck.sampler.scores.size() != ck.sampler.n || ck.sampler.weights.size() != ck.sampler.n ||
        ck.sampler.last_update_step.size() != ck.sampler.n) {
        throw FormatError("corrupt checkpoint: sampler arrays disagree with n");
    }

    ck.rng_shuffle = detail::get_string(in);
    ck.rng_select = detail::get_string(in);
    ck.rng_prune = detail::get_string(in);
    ck.next_epoch = detail::get_u64(in);
    ck.global_step = detail::get_u64(in);

    const std::uint64_t rows = detail::get_u64(in);
    ck.metrics.epochs.resize(rows);
    for (EpochMetrics& em : ck.metrics.epochs) {
        em.epoch = detail::get_u64(in);
        em.train_loss = detail::get_f64(in);
        em.test_acc = detail::get_f64(in);
        em.seconds = detail::get_f64(in);
        em.cum_fp_samples = detail::get_u64(in);
        em.cum_bp_samples = detail::get_u64(in);
        em.cum_updates = detail::get_u64(in);
    }
    return ck;
}

}  // namespace eswp
