#include "wdf/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wdf/errors.hpp"

namespace wdf::plots {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 380;
constexpr int kMarginLeft = 62;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 34;
constexpr int kMarginBottom = 32;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string f2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string g4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// Linear maps from data coordinates to pixel coordinates (y inverted).
struct Frame {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double px(double x) const {
        return kMarginLeft + (x - x_min) / (x_max - x_min) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_min) / (y_max - y_min) * (kHeight - kMarginTop - kMarginBottom);
    }
};

// Round the raw step up to the nearest 1/2/5 * 10^k.
double nice_step(double range, int target_ticks) {
    const double raw = range / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kMarginLeft << "\" y=\"20\" font-family=\"sans-serif\" "
        << "font-size=\"14\" fill=\"#333\">" << title << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& y_unit) {
    // y grid lines and labels
    const double y_step = nice_step(f.y_max - f.y_min, 5);
    const double y_first = std::ceil(f.y_min / y_step) * y_step;
    for (double y = y_first; y <= f.y_max + 1e-12 * y_step; y += y_step) {
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << f2(f.py(y)) << "\" x2=\""
            << kWidth - kMarginRight << "\" y2=\"" << f2(f.py(y))
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << f2(f.py(y) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" "
            << "text-anchor=\"end\">" << g4(y) << "</text>\n";
    }
    // x ticks at whole days, thinned to at most ~12 labels
    const double span_days = (f.x_max - f.x_min) / 24.0;
    double day_step = std::max(1.0, std::ceil(span_days / 12.0));
    if (day_step > 7.0) day_step = std::ceil(day_step / 7.0) * 7.0;
    const double x_first = std::ceil(f.x_min / (24.0 * day_step)) * 24.0 * day_step;
    for (double x = x_first; x <= f.x_max + 1e-9; x += 24.0 * day_step) {
        out << "<line x1=\"" << f2(f.px(x)) << "\" y1=\"" << kHeight - kMarginBottom
            << "\" x2=\"" << f2(f.px(x)) << "\" y2=\"" << kHeight - kMarginBottom + 4
            << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << f2(f.px(x)) << "\" y=\"" << kHeight - kMarginBottom + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" "
            << "text-anchor=\"middle\">h" << static_cast<long long>(x) << "</text>\n";
    }
    // frame and y-axis unit
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
        << kWidth - kMarginLeft - kMarginRight << "\" height=\""
        << kHeight - kMarginTop - kMarginBottom
        << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    out << "<text x=\"14\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" "
        << "transform=\"rotate(-90 14 " << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\" "
        << "text-anchor=\"middle\">" << y_unit << "</text>\n";
}

void draw_polyline(std::ostringstream& out, const Frame& f,
                   const std::vector<std::pair<double, double>>& pts, const char* color,
                   double width) {
    if (pts.size() < 2) return;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out << " ";
        out << f2(f.px(pts[i].first)) << "," << f2(f.py(pts[i].second));
    }
    out << "\"/>\n";
}

void draw_legend(std::ostringstream& out, const std::vector<std::pair<std::string, const char*>>&
                                              entries) {
    int y = kMarginTop + 14;
    const int x = kWidth - kMarginRight - 170;
    for (const auto& [label, color] : entries) {
        out << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\"" << x + 22 << "\" y2=\""
            << y - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << x + 28 << "\" y=\"" << y
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" << label
            << "</text>\n";
        y += 16;
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("plot: cannot open " + path);
    out << content;
}

}  // namespace

void write_forecast_svg(const std::string& path,
                        const std::vector<forecaster::ForecastRecord>& records,
                        const std::string& title) {
    if (records.empty()) throw InvalidArgumentError("write_forecast_svg: no records");

    std::vector<const forecaster::ForecastRecord*> sorted;
    for (const auto& r : records) {
        if (r.forecast.empty()) throw InvalidArgumentError("write_forecast_svg: empty forecast");
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->origin < b->origin; });

    // Measured points keyed by hour, so overlapping records collapse to one line.
    std::map<std::size_t, double> measured;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    std::size_t x_end = 0;
    for (const auto* r : sorted) {
        x_end = std::max(x_end, r->origin + r->forecast.size());
        for (std::size_t j = 0; j < r->forecast.size(); ++j) {
            y_min = std::min(y_min, r->forecast[j]);
            y_max = std::max(y_max, r->forecast[j]);
            if (!r->actual.empty()) {
                measured[r->origin + j] = r->actual[j];
                y_min = std::min(y_min, r->actual[j]);
                y_max = std::max(y_max, r->actual[j]);
            }
        }
    }
    if (y_min == y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    Frame f;
    f.x_min = static_cast<double>(sorted.front()->origin);
    f.x_max = static_cast<double>(x_end);
    const double pad = 0.05 * (y_max - y_min);
    f.y_min = y_min - pad;
    f.y_max = y_max + pad;

    std::ostringstream out;
    open_svg(out, title);
    draw_axes(out, f, "demand (m3/h)");
    if (!measured.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [h, v] : measured) pts.emplace_back(static_cast<double>(h), v);
        draw_polyline(out, f, pts, kPalette[0], 1.4);
    }
    for (const auto* r : sorted) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t j = 0; j < r->forecast.size(); ++j) {
            pts.emplace_back(static_cast<double>(r->origin + j), r->forecast[j]);
        }
        draw_polyline(out, f, pts, kPalette[1], 1.2);
    }
    draw_legend(out, {{"measured", kPalette[0]}, {"forecast", kPalette[1]}});
    out << "</svg>\n";
    write_file(path, out.str());
}

void write_cluster_demand_svg(const std::string& path,
                              const std::vector<data::DemandSeries>& clusters, std::size_t begin,
                              std::size_t end, const std::string& title) {
    if (clusters.empty()) throw InvalidArgumentError("write_cluster_demand_svg: no clusters");
    if (begin >= end) throw InvalidArgumentError("write_cluster_demand_svg: empty hour range");
    for (const auto& c : clusters) {
        if (c.values.size() < end) {
            throw InvalidArgumentError("write_cluster_demand_svg: range exceeds series '" +
                                       c.label + "'");
        }
    }

    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (const auto& c : clusters) {
        for (std::size_t h = begin; h < end; ++h) {
            y_min = std::min(y_min, c.values[h]);
            y_max = std::max(y_max, c.values[h]);
        }
    }
    if (y_min == y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    Frame f;
    f.x_min = static_cast<double>(begin);
    f.x_max = static_cast<double>(end);
    const double pad = 0.05 * (y_max - y_min);
    f.y_min = y_min - pad;
    f.y_max = y_max + pad;

    std::ostringstream out;
    open_svg(out, title);
    draw_axes(out, f, "demand (m3/h)");
    std::vector<std::pair<std::string, const char*>> legend;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t h = begin; h < end; ++h) {
            pts.emplace_back(static_cast<double>(h), clusters[i].values[h]);
        }
        draw_polyline(out, f, pts, color, 1.2);
        legend.emplace_back(clusters[i].label, color);
    }
    draw_legend(out, legend);
    out << "</svg>\n";
    write_file(path, out.str());
}

}  // namespace wdf::plots
