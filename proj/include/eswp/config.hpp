#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eswp/data.hpp"
#include "eswp/trainer.hpp"

namespace eswp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kConfigSchema = "eswp-config-v1";

struct DatasetSpec {
    std::string type = "gaussian";  // "gaussian" or "idx"
    // gaussian
    std::size_t n = 10000;
    std::size_t d = 50;
    std::size_t classes = 10;
    double separation = 3.0;
    std::uint64_t seed = 1;
    double test_fraction = 1.0 / 6.0;
    // idx
    std::string train_images, train_labels, test_images, test_labels;
    std::optional<std::size_t> limit, test_limit;
};

struct OutputSpec {
    std::string metrics_csv = "metrics.csv";
    std::string checkpoint;  // empty -> no checkpoint written
    bool timing = true;      // false -> epoch_seconds recorded as 0
};

struct RunSpec {
    std::string name;
    TrainConfig cfg;
    double anneal_ratio = 0.05;  // kept for sweeps over the ratio
};

struct Experiment {
    DatasetSpec dataset;
    OutputSpec output;
    std::vector<RunSpec> runs;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

inline StrategyKind parse_strategy(const std::string& s) {
    if (s == "uniform") return StrategyKind::Uniform;
    if (s == "loss") return StrategyKind::Loss;
    if (s == "order") return StrategyKind::Order;
    if (s == "es") return StrategyKind::ES;
    if (s == "eswp") return StrategyKind::ESWP;
    if (s == "nondif") return StrategyKind::NonDif;
    if (s == "random_prune") return StrategyKind::RandomPrune;
    throw ConfigError("unknown value \"" + s + "\" for key \"strategy\"");
}

inline ModelKind parse_model(const std::string& s) {
    if (s == "linear") return ModelKind::Linear;
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "mlp") return ModelKind::Mlp;
    throw ConfigError("unknown value \"" + s + "\" for key \"model\"");
}

inline LrSchedule parse_schedule(const std::string& s) {
    if (s == "constant") return LrSchedule::Constant;
    if (s == "cosine") return LrSchedule::Cosine;
    throw ConfigError("unknown value \"" + s + "\" for key \"schedule\"");
}

inline std::size_t anneal_epochs(double ratio, std::size_t epochs) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(epochs)));
}

}  // namespace detail

// Parses one entry of "runs". Defaults follow the recommended settings:
// ES betas (0.2, 0.9), ESWP betas (0.2, 0.8) with pruning ratio 0.2,
// b/B = 25% (128/32), annealing ratio 5% per side.
inline RunSpec parse_run(const nlohmann::json& j, const std::string& where) {
    detail::reject_unknown_keys(
        j,
        {"name", "strategy", "beta1", "beta2", "meta_batch", "mini_batch", "prune_ratio",
         "anneal_ratio", "anneal_start", "anneal_end", "epochs", "lr", "momentum",
         "weight_decay", "schedule", "seed", "model", "hidden"},
        where);
    RunSpec run;
    const StrategyKind kind = detail::parse_strategy(j.value("strategy", "uniform"));
    run.name = j.value("name", std::string(to_string(kind)));

    double beta1 = 0.2, beta2 = 0.9;
    if (kind == StrategyKind::ESWP) beta2 = 0.8;
    beta1 = j.value("beta1", beta1);
    beta2 = j.value("beta2", beta2);
    if (kind == StrategyKind::NonDif) beta2 = j.contains("beta2") ? beta2 : beta1;
    try {
        run.cfg.strategy = Strategy(kind, BetaParams(beta1, beta2));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(e.what()) + " (keys \"beta1\"/\"beta2\" in " + where + ")");
    }

    run.cfg.meta_batch = j.value("meta_batch", 128u);
    run.cfg.mini_batch = j.value("mini_batch", 32u);
    run.cfg.epochs = j.value("epochs", 20u);

    double prune_ratio = kind == StrategyKind::ESWP || kind == StrategyKind::RandomPrune ? 0.2 : 0.0;
    prune_ratio = j.value("prune_ratio", prune_ratio);
    try {
        run.cfg.prune = PruneConfig(prune_ratio);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(e.what()) + " (key \"prune_ratio\" in " + where + ")");
    }

    run.anneal_ratio = j.value("anneal_ratio", 0.05);
    std::size_t a_start = detail::anneal_epochs(run.anneal_ratio, run.cfg.epochs);
    std::size_t a_end = a_start;
    a_start = j.value("anneal_start", a_start);
    a_end = j.value("anneal_end", a_end);
    try {
        run.cfg.anneal = AnnealWindow(a_start, a_end, run.cfg.epochs);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(e.what()) +
                          " (keys \"anneal_start\"/\"anneal_end\"/\"epochs\" in " + where + ")");
    }

    run.cfg.optimizer.base_lr = j.value("lr", 0.1);
    run.cfg.optimizer.momentum = j.value("momentum", 0.9);
    run.cfg.optimizer.weight_decay = j.value("weight_decay", 0.0);
    run.cfg.optimizer.schedule = detail::parse_schedule(j.value("schedule", "cosine"));
    run.cfg.seed = j.value("seed", 0u);

    run.cfg.model.kind = detail::parse_model(j.value("model", "logistic"));
    run.cfg.model.hidden_dim = j.value("hidden", run.cfg.model.kind == ModelKind::Mlp ? 64u : 0u);
    // input_dim / outputs are filled from the dataset before running
    return run;
}

inline Experiment parse_experiment(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    detail::reject_unknown_keys(j, {"schema", "dataset", "output", "runs"}, "config root");
    if (j.value("schema", "") != kConfigSchema) {
        throw ConfigError("key \"schema\" must be \"" + std::string(kConfigSchema) + "\"");
    }

    Experiment exp;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        detail::reject_unknown_keys(d,
                                    {"type", "n", "d", "classes", "separation", "seed",
                                     "test_fraction", "train_images", "train_labels",
                                     "test_images", "test_labels", "limit", "test_limit"},
                                    "\"dataset\"");
        exp.dataset.type = d.value("type", "gaussian");
        if (exp.dataset.type != "gaussian" && exp.dataset.type != "idx") {
            throw ConfigError("unknown value \"" + exp.dataset.type + "\" for key \"type\"");
        }
        exp.dataset.n = d.value("n", exp.dataset.n);
        exp.dataset.d = d.value("d", exp.dataset.d);
        exp.dataset.classes = d.value("classes", exp.dataset.classes);
        exp.dataset.separation = d.value("separation", exp.dataset.separation);
        exp.dataset.seed = d.value("seed", exp.dataset.seed);
        exp.dataset.test_fraction = d.value("test_fraction", exp.dataset.test_fraction);
        exp.dataset.train_images = d.value("train_images", "");
        exp.dataset.train_labels = d.value("train_labels", "");
        exp.dataset.test_images = d.value("test_images", "");
        exp.dataset.test_labels = d.value("test_labels", "");
        if (d.contains("limit")) exp.dataset.limit = d.at("limit").get<std::size_t>();
        if (d.contains("test_limit")) exp.dataset.test_limit = d.at("test_limit").get<std::size_t>();
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"metrics_csv", "checkpoint", "timing"}, "\"output\"");
        exp.output.metrics_csv = o.value("metrics_csv", exp.output.metrics_csv);
        exp.output.checkpoint = o.value("checkpoint", "");
        exp.output.timing = o.value("timing", true);
    }
    if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty()) {
        throw ConfigError("key \"runs\" must be a non-empty array");
    }
    std::size_t idx = 0;
    for (const auto& r : j.at("runs")) {
        exp.runs.push_back(parse_run(r, "\"runs\"[" + std::to_string(idx) + "]"));
        ++idx;
    }
    return exp;
}

// Applies "key=value" overrides. Keys prefixed "dataset." or "output."
// touch those sections; everything else is applied to every run entry.
inline nlohmann::json apply_overrides(nlohmann::json j,
                                      const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override \"" + ov + "\" is not of the form key=value");
        }
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error&) {
            value = raw;  // bare strings
        }
        if (key.rfind("dataset.", 0) == 0) {
            j["dataset"][key.substr(8)] = value;
        } else if (key.rfind("output.", 0) == 0) {
            j["output"][key.substr(7)] = value;
        } else {
            if (!j.contains("runs")) throw ConfigError("override with no \"runs\" to apply to");
            for (auto& r : j["runs"]) r[key] = value;
        }
    }
    return j;
}

inline nlohmann::json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// Materializes the train/test pair described by the dataset section.
inline std::pair<IndexedDataset, IndexedDataset> build_dataset(const DatasetSpec& spec) {
    if (spec.type == "idx") {
        if (spec.train_images.empty() || spec.train_labels.empty() || spec.test_images.empty() ||
            spec.test_labels.empty()) {
            throw ConfigError(
                "dataset type \"idx\" requires keys \"train_images\", \"train_labels\", "
                "\"test_images\", \"test_labels\"");
        }
        IndexedDataset train = load_idx(spec.train_images, spec.train_labels, spec.limit);
        IndexedDataset test = load_idx(spec.test_images, spec.test_labels, spec.test_limit);
        train.classes = test.classes = std::max(train.classes, test.classes);
        return {std::move(train), std::move(test)};
    }
    IndexedDataset all = gen_gaussian_mixture(spec.n, spec.d, spec.classes, spec.separation,
                                              spec.seed);
    return split(all, spec.test_fraction, spec.seed);
}

// Binds a parsed run to a concrete dataset shape.
inline void finalize_run(RunSpec& run, const IndexedDataset& train) {
    run.cfg.model.input_dim = train.dim;
    run.cfg.model.outputs = run.cfg.model.kind == ModelKind::Linear ? 1 : train.classes;
}

}  // namespace eswp
