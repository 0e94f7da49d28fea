#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "eswp/csv.hpp"

namespace eswp {

// Renders test accuracy versus cumulative BP samples as an SVG line
// chart, one polyline per run_id. Output is byte-deterministic for
// identical input: fixed float formatting, series in first-appearance
// order, fixed palette.
inline void plot_accuracy_vs_bp(const std::vector<MetricsRow>& rows, std::ostream& out) {
    if (rows.empty()) throw FormatError("plot: no data rows");

    std::vector<std::string> series_order;
    std::map<std::string, std::vector<const MetricsRow*>> series;
    for (const MetricsRow& r : rows) {
        if (series.find(r.run_id) == series.end()) series_order.push_back(r.run_id);
        series[r.run_id].push_back(&r);
    }

    double x_max = 0.0, y_min = 1.0, y_max = 0.0;
    for (const MetricsRow& r : rows) {
        x_max = std::max(x_max, static_cast<double>(r.cum_bp_samples));
        y_min = std::min(y_min, r.test_acc);
        y_max = std::max(y_max, r.test_acc);
    }
    if (x_max <= 0.0) x_max = 1.0;
    if (y_max <= y_min) {
        y_min -= 0.05;
        y_max += 0.05;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double width = 800, height = 500;
    const double ml = 70, mr = 160, mt = 30, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double v) { return ml + pw * (v / x_max); };
    auto sy = [&](double v) { return mt + ph * (1.0 - (v - y_min) / (y_max - y_min)); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                     "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    const std::size_t palette_n = sizeof(kPalette) / sizeof(kPalette[0]);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw)
        << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
        << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_max * i / 5.0;
        const double yv = y_min + (y_max - y_min) * i / 5.0;
        out << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(mt + ph + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(xv) << "</text>\n";
        out << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(sy(yv) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(height - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\">cumulative BP samples</text>\n";
    out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(mt + ph / 2) << ")\">test accuracy</text>\n";

    for (std::size_t s = 0; s < series_order.size(); ++s) {
        const auto& pts = series[series_order[s]];
        const char* color = kPalette[s % palette_n];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out << ' ';
            out << num(sx(static_cast<double>(pts[i]->cum_bp_samples))) << ','
                << num(sy(pts[i]->test_acc));
        }
        out << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << num(ml + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
            << num(ml + pw + 34) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << num(ml + pw + 40) << "\" y=\"" << num(ly)
            << "\" font-size=\"12\">" << series_order[s] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace eswp
