// Command-line front end: experiment execution, ablation sweeps, analysis
// CSV emission, and SVG plotting.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "eswp/analysis.hpp"
#include "eswp/config.hpp"
#include "eswp/csv.hpp"
#include "eswp/plot.hpp"
#include "eswp/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw eswp::ConfigError("empty value list: \"" + csv + "\"");
    return out;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    const nlohmann::json raw =
        eswp::apply_overrides(eswp::load_config_json(config_path), overrides);
    eswp::Experiment exp = eswp::parse_experiment(raw);
    auto [train, test] = eswp::build_dataset(exp.dataset);

    std::ofstream csv(exp.output.metrics_csv);
    if (!csv) throw eswp::ConfigError("cannot write metrics CSV: " + exp.output.metrics_csv);
    csv << eswp::metrics_csv_header();
    for (eswp::RunSpec& run : exp.runs) {
        eswp::finalize_run(run, train);
        run.cfg.record_timing = exp.output.timing;
        const eswp::TrainResult result = eswp::run_training(run.cfg, train, test);
        eswp::append_metrics_csv(csv, run.name, run.cfg.strategy.kind, result.metrics);
        if (!exp.output.checkpoint.empty()) {
            eswp::checkpoint_save(result.checkpoint, exp.output.checkpoint + "." + run.name);
        }
        const eswp::EpochMetrics& last = result.metrics.epochs.back();
        std::cout << run.name << ": test_acc=" << last.test_acc
                  << " bp_samples=" << last.cum_bp_samples << " updates=" << last.cum_updates
                  << "\n";
    }
    std::cout << "wrote " << exp.output.metrics_csv << "\n";
    return kExitOk;
}

void apply_axis(eswp::RunSpec& run, const std::string& axis, double value) {
    if (axis == "beta1") {
        run.cfg.strategy.betas = eswp::BetaParams(value, run.cfg.strategy.betas.beta2);
    } else if (axis == "beta2") {
        run.cfg.strategy.betas = eswp::BetaParams(run.cfg.strategy.betas.beta1, value);
    } else if (axis == "b_over_B") {
        run.cfg.mini_batch = static_cast<std::size_t>(
            std::llround(value * static_cast<double>(run.cfg.meta_batch)));
        if (run.cfg.mini_batch == 0) run.cfg.mini_batch = 1;
    } else if (axis == "prune_ratio") {
        run.cfg.prune = eswp::PruneConfig(value);
    } else if (axis == "anneal_ratio") {
        const std::size_t a = static_cast<std::size_t>(
            std::llround(value * static_cast<double>(run.cfg.epochs)));
        run.cfg.anneal = eswp::AnnealWindow(a, a, run.cfg.epochs);
    } else {
        throw eswp::ConfigError(
            "unknown sweep axis \"" + axis +
            "\" (expected beta1, beta2, b_over_B, prune_ratio or anneal_ratio)");
    }
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_csv, const std::string& out_path,
              const std::vector<std::string>& overrides) {
    const std::vector<double> values = parse_double_list(values_csv);
    const nlohmann::json raw =
        eswp::apply_overrides(eswp::load_config_json(config_path), overrides);
    eswp::Experiment exp = eswp::parse_experiment(raw);
    auto [train, test] = eswp::build_dataset(exp.dataset);

    // validate every point before spending any training time
    std::vector<eswp::RunSpec> points(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        points[i] = exp.runs.front();
        apply_axis(points[i], axis, values[i]);
        eswp::finalize_run(points[i], train);
        points[i].cfg.validate(train);
    }

    std::size_t workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("ESWP_THREADS")) {
        workers = std::max<std::size_t>(1, static_cast<std::size_t>(std::atoll(env)));
    }
    workers = std::min<std::size_t>(std::max<std::size_t>(workers, 1), values.size());

    struct Row {
        double final_acc = 0.0;
        std::uint64_t bp = 0;
        double seconds = 0.0;
    };
    std::vector<Row> rows(values.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
            try {
                const eswp::TrainResult r = eswp::run_training(points[i].cfg, train, test);
                double secs = 0.0;
                for (const auto& em : r.metrics.epochs) secs += em.seconds;
                rows[i] = {r.metrics.epochs.back().test_acc, r.metrics.bp_samples(), secs};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);

    std::ofstream out(out_path);
    if (!out) throw eswp::ConfigError("cannot write sweep CSV: " + out_path);
    out << "axis_value,final_test_acc,cum_bp_samples,total_seconds\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.6f", rows[i].seconds);
        out << eswp::format_double(values[i]) << ',' << eswp::format_double(rows[i].final_acc)
            << ',' << rows[i].bp << ',' << secs << '\n';
    }
    std::cout << "wrote " << out_path << " (" << values.size() << " rows)\n";
    return kExitOk;
}

int cmd_freq(double beta1, double beta2, const std::string& omegas_csv, std::size_t cycles,
             const std::string& out_path) {
    const std::vector<double> omegas = parse_double_list(omegas_csv);
    const eswp::BetaParams betas(beta1, beta2);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw eswp::ConfigError("cannot write CSV: " + out_path);
        out = &file;
    }
    *out << "omega,continuous_gain,discrete_gain,empirical_gain\n";
    for (double w : omegas) {
        *out << eswp::format_double(w) << ',' << eswp::format_double(eswp::continuous_gain(betas, w))
             << ',' << eswp::format_double(eswp::discrete_gain(betas, w)) << ','
             << eswp::format_double(eswp::empirical_gain(betas, w, cycles)) << '\n';
    }
    return kExitOk;
}

int cmd_oracle(double beta1, double beta2, std::size_t trace_len, std::uint64_t seed,
               const std::string& out_path) {
    const eswp::BetaParams betas(beta1, beta2);
    eswp::Rng rng = eswp::Rng::derive(seed, 0);
    const eswp::LossTrace trace =
        eswp::random_trace(trace_len, 1.0 / static_cast<double>(trace_len), rng);
    const std::vector<double> rec = eswp::recursion_weights(trace, betas);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw eswp::ConfigError("cannot write CSV: " + out_path);
        out = &file;
    }
    *out << "t,recursion_w,expansion_w,gap\n";
    for (std::size_t t = 1; t <= trace_len; ++t) {
        const double exp_w = eswp::expansion_weight(trace, betas, t);
        *out << t << ',' << eswp::format_double(rec[t - 1]) << ',' << eswp::format_double(exp_w)
             << ',' << eswp::format_double(std::abs(rec[t - 1] - exp_w)) << '\n';
    }
    return kExitOk;
}

int cmd_plot(const std::string& metrics_path, const std::string& svg_path) {
    const std::vector<eswp::MetricsRow> rows = eswp::read_metrics_csv_file(metrics_path);
    std::ofstream out(svg_path);
    if (!out) throw eswp::ConfigError("cannot write SVG: " + svg_path);
    eswp::plot_accuracy_vs_bp(rows, out);
    std::cout << "wrote " << svg_path << "\n";
    return kExitOk;
}

int cmd_bpcount(std::uint64_t meta, std::uint64_t mini, std::uint64_t micro) {
    const auto [baseline, selected] = eswp::bp_pass_count(meta, mini, micro);
    std::cout << "baseline_passes=" << baseline << " selected_passes=" << selected << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolved Sampling training, sweep and analysis tool"};
    app.require_subcommand(1);

    std::string config_path, axis, values_csv, out_path, sweep_out, metrics_path, svg_path,
        omegas_csv;
    std::vector<std::string> overrides;
    double beta1 = 0.2, beta2 = 0.9;
    std::size_t cycles = 40, trace_len = 1000;
    std::uint64_t seed = 0, meta = 32, mini = 8, micro = 8;

    auto* train = app.add_subcommand("train", "run the experiments in a config file");
    train->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    train->add_option("-s,--set", overrides, "key=value overrides (run-level, or dataset./output. prefixed)");

    auto* sweep = app.add_subcommand("sweep", "rerun the first configured run along one axis");
    sweep->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("-a,--axis", axis, "beta1|beta2|b_over_B|prune_ratio|anneal_ratio")->required();
    sweep->add_option("-v,--values", values_csv, "comma-separated axis values")->required();
    sweep->add_option("-o,--out", sweep_out, "aggregate CSV path")->default_val("sweep.csv");
    sweep->add_option("-s,--set", overrides, "key=value overrides applied before sweeping");

    auto* freq = app.add_subcommand("freq", "transfer-function gains as CSV");
    freq->add_option("--beta1", beta1, "beta1")->default_val(0.2);
    freq->add_option("--beta2", beta2, "beta2")->default_val(0.9);
    freq->add_option("--omegas", omegas_csv, "comma-separated angular frequencies")->required();
    freq->add_option("--cycles", cycles, "measurement window in periods")->default_val(40);
    freq->add_option("-o,--out", out_path, "CSV path (default: stdout)");

    auto* oracle = app.add_subcommand("oracle", "recursion vs expansion on a random trace");
    oracle->add_option("--beta1", beta1, "beta1")->default_val(0.2);
    oracle->add_option("--beta2", beta2, "beta2")->default_val(0.9);
    oracle->add_option("--trace-len", trace_len, "trace length")->default_val(1000);
    oracle->add_option("--seed", seed, "trace seed")->default_val(0);
    oracle->add_option("-o,--out", out_path, "CSV path (default: stdout)");

    auto* plot = app.add_subcommand("plot", "accuracy-vs-BP-samples SVG from a metrics CSV");
    plot->add_option("metrics_csv", metrics_path, "metrics CSV path")->required();
    plot->add_option("out_svg", svg_path, "output SVG path")->required();

    auto* bpcount = app.add_subcommand("bpcount", "BP passes per update under gradient accumulation");
    bpcount->add_option("--meta", meta, "meta-batch size B")->required();
    bpcount->add_option("--mini", mini, "mini-batch size b")->required();
    bpcount->add_option("--micro", micro, "micro-batch size")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train) return cmd_train(config_path, overrides);
        if (*sweep) return cmd_sweep(config_path, axis, values_csv, sweep_out, overrides);
        if (*freq) return cmd_freq(beta1, beta2, omegas_csv, cycles, out_path);
        if (*oracle) return cmd_oracle(beta1, beta2, trace_len, seed, out_path);
        if (*plot) return cmd_plot(metrics_path, svg_path);
        if (*bpcount) return cmd_bpcount(meta, mini, micro);
    } catch (const eswp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const eswp::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
