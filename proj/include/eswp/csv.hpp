#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswp/data.hpp"
#include "eswp/trainer.hpp"

namespace eswp {

// One metrics row per trained epoch. All CSVs are UTF-8 with a header
// row, '.' decimal separator and '\n' line ends.
inline const char* metrics_csv_header() {
    return "run_id,strategy,epoch,train_loss,test_acc,epoch_seconds,"
           "cum_fp_samples,cum_bp_samples,cum_updates\n";
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void append_metrics_csv(std::ostream& out, const std::string& run_id,
                               StrategyKind strategy, const RunMetrics& metrics) {
    for (const EpochMetrics& em : metrics.epochs) {
        char sec[32];
        std::snprintf(sec, sizeof sec, "%.6f", em.seconds);
        out << run_id << ',' << to_string(strategy) << ',' << em.epoch << ','
            << format_double(em.train_loss) << ',' << format_double(em.test_acc) << ',' << sec
            << ',' << em.cum_fp_samples << ',' << em.cum_bp_samples << ',' << em.cum_updates
            << '\n';
    }
}

struct MetricsRow {
    std::string run_id;
    std::string strategy;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_acc = 0.0;
    double epoch_seconds = 0.0;
    std::uint64_t cum_fp_samples = 0;
    std::uint64_t cum_bp_samples = 0;
    std::uint64_t cum_updates = 0;
};

inline std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("metrics CSV is empty (row 0)");
    }
    std::vector<MetricsRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 9) {
            throw FormatError("malformed metrics CSV at row " + std::to_string(lineno) +
                              ": expected 9 fields, got " + std::to_string(fields.size()));
        }
        MetricsRow r;
        try {
            r.run_id = fields[0];
            r.strategy = fields[1];
            r.epoch = std::stoull(fields[2]);
            r.train_loss = std::stod(fields[3]);
            r.test_acc = std::stod(fields[4]);
            r.epoch_seconds = std::stod(fields[5]);
            r.cum_fp_samples = std::stoull(fields[6]);
            r.cum_bp_samples = std::stoull(fields[7]);
            r.cum_updates = std::stoull(fields[8]);
        } catch (const std::exception&) {
            throw FormatError("malformed metrics CSV at row " + std::to_string(lineno));
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) {
        throw FormatError("metrics CSV has a header but no data rows (row 1)");
    }
    return rows;
}

inline std::vector<MetricsRow> read_metrics_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open metrics CSV: " + path);
    return read_metrics_csv(in);
}

}  // namespace eswp
