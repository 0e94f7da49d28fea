#include <gtest/gtest.h>

#include "eswp/config.hpp"

using namespace eswp;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
        "schema": "eswp-config-v1",
        "runs": [{"strategy": "es"}]
    })");
}

}  // namespace

TEST(Config, SchemaRequired) {
    json j = minimal();
    j.erase("schema");
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j["schema"] = "something-else";
    EXPECT_THROW(parse_experiment(j), ConfigError);
}

TEST(Config, RunsRequiredNonEmpty) {
    json j = minimal();
    j["runs"] = json::array();
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j.erase("runs");
    EXPECT_THROW(parse_experiment(j), ConfigError);
}

TEST(Config, DefaultsApplied) {
    const Experiment exp = parse_experiment(minimal());
    ASSERT_EQ(exp.runs.size(), 1u);
    const RunSpec& run = exp.runs[0];
    EXPECT_EQ(run.name, "es");
    EXPECT_EQ(run.cfg.strategy.kind, StrategyKind::ES);
    EXPECT_DOUBLE_EQ(run.cfg.strategy.betas.beta1, 0.2);
    EXPECT_DOUBLE_EQ(run.cfg.strategy.betas.beta2, 0.9);
    EXPECT_EQ(run.cfg.meta_batch, 128u);
    EXPECT_EQ(run.cfg.mini_batch, 32u);
    EXPECT_EQ(run.cfg.epochs, 20u);
    EXPECT_EQ(run.cfg.anneal.start_epochs, 1u);  // 5% of 20
    EXPECT_EQ(run.cfg.anneal.end_epochs, 1u);
    EXPECT_EQ(run.cfg.optimizer.schedule, LrSchedule::Cosine);
    EXPECT_DOUBLE_EQ(run.cfg.optimizer.momentum, 0.9);
    EXPECT_EQ(run.cfg.model.kind, ModelKind::Logistic);
    EXPECT_EQ(exp.dataset.type, "gaussian");
    EXPECT_EQ(exp.dataset.n, 10000u);
    EXPECT_EQ(exp.output.metrics_csv, "metrics.csv");
    EXPECT_TRUE(exp.output.timing);
}

TEST(Config, EswpDefaultsDiffer) {
    json j = minimal();
    j["runs"][0]["strategy"] = "eswp";
    const Experiment exp = parse_experiment(j);
    EXPECT_DOUBLE_EQ(exp.runs[0].cfg.strategy.betas.beta2, 0.8);
    EXPECT_DOUBLE_EQ(exp.runs[0].cfg.prune.ratio, 0.2);
}

TEST(Config, UnknownKeyNamed) {
    json j = minimal();
    j["runs"][0]["learning_rate"] = 0.5;  // real key is "lr"
    try {
        parse_experiment(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
    }
}

TEST(Config, BadEnumValueNamed) {
    json j = minimal();
    j["runs"][0]["strategy"] = "magic";
    try {
        parse_experiment(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("strategy"), std::string::npos);
    }
}

TEST(Config, BetaOutOfRangeNamed) {
    json j = minimal();
    j["runs"][0]["beta2"] = 1.5;
    try {
        parse_experiment(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
    }
}

TEST(Config, ExplicitAnnealWindow) {
    json j = minimal();
    j["runs"][0]["epochs"] = 10;
    j["runs"][0]["anneal_start"] = 2;
    j["runs"][0]["anneal_end"] = 3;
    const Experiment exp = parse_experiment(j);
    EXPECT_EQ(exp.runs[0].cfg.anneal.start_epochs, 2u);
    EXPECT_EQ(exp.runs[0].cfg.anneal.end_epochs, 3u);
    EXPECT_EQ(exp.runs[0].cfg.anneal.total_epochs, 10u);
}

TEST(Config, OverridesRouteBySections) {
    json j = minimal();
    const json patched = apply_overrides(
        j, {"lr=0.05", "dataset.n=500", "output.timing=false", "name=tuned"});
    const Experiment exp = parse_experiment(patched);
    EXPECT_DOUBLE_EQ(exp.runs[0].cfg.optimizer.base_lr, 0.05);
    EXPECT_EQ(exp.dataset.n, 500u);
    EXPECT_FALSE(exp.output.timing);
    EXPECT_EQ(exp.runs[0].name, "tuned");
}

TEST(Config, OverrideWithoutEqualsRejected) {
    EXPECT_THROW(apply_overrides(minimal(), {"lr"}), ConfigError);
}

TEST(Config, BareStringOverride) {
    const json patched = apply_overrides(minimal(), {"schedule=constant"});
    const Experiment exp = parse_experiment(patched);
    EXPECT_EQ(exp.runs[0].cfg.optimizer.schedule, LrSchedule::Constant);
}

TEST(Config, DatasetBuildGaussianSplit) {
    DatasetSpec spec;
    spec.n = 120;
    spec.d = 4;
    spec.classes = 3;
    spec.test_fraction = 0.25;
    const auto [train, test] = build_dataset(spec);
    EXPECT_EQ(train.n, 90u);
    EXPECT_EQ(test.n, 30u);
    EXPECT_EQ(train.dim, 4u);
}

TEST(Config, IdxTypeRequiresPaths) {
    DatasetSpec spec;
    spec.type = "idx";
    EXPECT_THROW(build_dataset(spec), ConfigError);
}

TEST(Config, FinalizeRunBindsModelShape) {
    json j = minimal();
    const Experiment parsed = parse_experiment(j);
    RunSpec run = parsed.runs[0];
    const IndexedDataset ds = gen_gaussian_mixture(30, 7, 4, 2.0, 1);
    finalize_run(run, ds);
    EXPECT_EQ(run.cfg.model.input_dim, 7u);
    EXPECT_EQ(run.cfg.model.outputs, 4u);

    j["runs"][0]["model"] = "linear";
    RunSpec lin = parse_experiment(j).runs[0];
    finalize_run(lin, ds);
    EXPECT_EQ(lin.cfg.model.outputs, 1u);
}

TEST(Config, InvalidJsonFileRejected) {
    EXPECT_THROW(load_config_json("no_such_config.json"), ConfigError);
}
