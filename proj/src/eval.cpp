#include "wdf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "wdf/errors.hpp"

namespace wdf::eval {

namespace {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_2f(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Running sums of one evaluation: absolute-percentage ratios for MAPE,
// absolute errors for MAE, and the exclusion tally.
struct Accumulator {
    double ratio_sum = 0.0;
    double abs_sum = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    std::size_t hours = 0;

    void add(double a, double f, double epsilon) {
        abs_sum += std::abs(a - f);
        ++hours;
        if (a <= epsilon) {
            ++excluded;
        } else {
            ratio_sum += std::abs(a - f) / a;
            ++included;
        }
    }
};

void check_lengths(const std::vector<double>& actual, const std::vector<double>& forecast,
                   const char* who) {
    if (actual.size() != forecast.size()) {
        throw InvalidArgumentError(std::string(who) + ": actual and forecast lengths differ");
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

MapeBreakdown mape_breakdown(const std::vector<double>& actual,
                             const std::vector<double>& forecast, double epsilon) {
    check_lengths(actual, forecast, "mape");
    Accumulator acc;
    for (std::size_t i = 0; i < actual.size(); ++i) acc.add(actual[i], forecast[i], epsilon);
    if (acc.included == 0) {
        throw UndefinedMetricError("mape: every hour excluded (actual <= epsilon)");
    }
    MapeBreakdown out;
    out.percent = 100.0 * (acc.ratio_sum / static_cast<double>(acc.included));
    out.included = acc.included;
    out.excluded = acc.excluded;
    return out;
}

double mape(const std::vector<double>& actual, const std::vector<double>& forecast,
            double epsilon) {
    return mape_breakdown(actual, forecast, epsilon).percent;
}

double mae_lh(const std::vector<double>& actual, const std::vector<double>& forecast) {
    check_lengths(actual, forecast, "mae_lh");
    if (actual.empty()) throw InvalidArgumentError("mae_lh: empty series");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - forecast[i]);
    return 1000.0 * (sum / static_cast<double>(actual.size()));
}

PooledMetrics pool_metrics(const std::vector<ForecastRecord>& records, double epsilon,
                           bool per_day_average) {
    if (records.empty()) throw InvalidArgumentError("pool_metrics: no records");
    Accumulator pooled;
    double day_mape_sum = 0.0;
    std::size_t days_with_hours = 0;
    for (const auto& r : records) {
        if (r.actual.size() != r.forecast.size() || r.forecast.empty()) {
            throw InvalidArgumentError("pool_metrics: record without matching actuals");
        }
        Accumulator day;
        for (std::size_t j = 0; j < r.forecast.size(); ++j) {
            day.add(r.actual[j], r.forecast[j], epsilon);
        }
        pooled.ratio_sum += day.ratio_sum;
        pooled.abs_sum += day.abs_sum;
        pooled.included += day.included;
        pooled.excluded += day.excluded;
        pooled.hours += day.hours;
        if (day.included > 0) {
            day_mape_sum += 100.0 * (day.ratio_sum / static_cast<double>(day.included));
            ++days_with_hours;
        }
    }
    if (pooled.included == 0) {
        throw UndefinedMetricError("pool_metrics: every hour excluded (actual <= epsilon)");
    }
    PooledMetrics out;
    out.mape_percent = per_day_average
                           ? day_mape_sum / static_cast<double>(days_with_hours)
                           : 100.0 * (pooled.ratio_sum / static_cast<double>(pooled.included));
    out.mae_lh = 1000.0 * (pooled.abs_sum / static_cast<double>(pooled.hours));
    out.hours_included = pooled.included;
    out.hours_excluded = pooled.excluded;
    return out;
}

MetricReport rolling_evaluate(const std::string& model_name, const ForecastFn& forecast_at,
                              const std::vector<double>& actual, std::size_t test_begin,
                              std::size_t test_end, const RollingOptions& options) {
    if (!forecast_at) throw InvalidArgumentError("rolling_evaluate: empty forecast callable");
    if (options.stride == 0 || options.horizon <= 0) {
        throw InvalidArgumentError("rolling_evaluate: stride and horizon must be positive");
    }
    if (test_end > actual.size() || test_begin > test_end) {
        throw InvalidArgumentError("rolling_evaluate: test range outside the series");
    }
    const auto horizon = static_cast<std::size_t>(options.horizon);
    if (test_begin + horizon > test_end) {
        throw InsufficientDataError("rolling_evaluate: test range shorter than one horizon");
    }

    MetricReport report;
    report.model = model_name;
    report.span_begin = test_begin;
    report.span_end = test_end;
    report.config_hash = options.config_hash;
    report.seed = options.seed;
    for (std::size_t t = test_begin; t + horizon <= test_end; t += options.stride) {
        ForecastRecord rec;
        rec.origin = t;
        rec.forecast = forecast_at(t);
        if (rec.forecast.size() != horizon) {
            throw InvalidArgumentError("rolling_evaluate: model returned " +
                                       std::to_string(rec.forecast.size()) + " values, expected " +
                                       std::to_string(horizon));
        }
        rec.actual.assign(actual.begin() + static_cast<std::ptrdiff_t>(t),
                          actual.begin() + static_cast<std::ptrdiff_t>(t + horizon));
        report.records.push_back(std::move(rec));
    }
    report.origins = report.records.size();

    const auto pooled = pool_metrics(report.records, options.epsilon, options.per_day_average);
    report.mape_percent = pooled.mape_percent;
    report.mae_lh = pooled.mae_lh;
    report.hours_included = pooled.hours_included;
    report.hours_excluded = pooled.hours_excluded;
    return report;
}

Comparison compare_models(const std::vector<MetricReport>& reports, const std::string& baseline) {
    if (reports.empty()) throw InvalidArgumentError("compare_models: no reports");
    std::set<std::string> names;
    const MetricReport* base = nullptr;
    for (const auto& r : reports) {
        if (!names.insert(r.model).second) {
            throw InvalidArgumentError("compare_models: duplicate model name '" + r.model + "'");
        }
        if (r.span_begin != reports.front().span_begin || r.span_end != reports.front().span_end) {
            throw ConflictError("compare_models: report spans differ ('" + r.model + "' vs '" +
                                reports.front().model + "')");
        }
        if (r.model == baseline) base = &r;
    }
    if (base == nullptr) {
        throw InvalidArgumentError("compare_models: baseline report '" + baseline +
                                   "' not among the inputs");
    }

    Comparison cmp;
    cmp.baseline = baseline;
    for (const auto& r : reports) {
        ComparisonRow row;
        row.model = r.model;
        row.mape_percent = r.mape_percent;
        row.mae_lh = r.mae_lh;
        row.improvement_points = base->mape_percent - r.mape_percent;
        cmp.rows.push_back(std::move(row));
    }
    std::sort(cmp.rows.begin(), cmp.rows.end(),
              [](const ComparisonRow& a, const ComparisonRow& b) { return a.model < b.model; });
    return cmp;
}

std::string comparison_text(const Comparison& comparison) {
    std::size_t width = 5;  // "model"
    for (const auto& r : comparison.rows) width = std::max(width, r.model.size());
    std::ostringstream out;
    char head[160];
    std::snprintf(head, sizeof(head), "%-*s  %8s  %10s  %s\n", static_cast<int>(width), "model",
                  "MAPE_%", "MAE_lh", ("vs " + comparison.baseline + " (pts)").c_str());
    out << head;
    for (const auto& r : comparison.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-*s  %8.2f  %10.2f  %+.2f\n",
                      static_cast<int>(width), r.model.c_str(), r.mape_percent, r.mae_lh,
                      r.improvement_points);
        out << line;
    }
    return out.str();
}

std::string comparison_csv(const Comparison& comparison) {
    std::ostringstream out;
    out << "model,mape_percent,mae_lh,improvement_points_vs_" << comparison.baseline << "\n";
    for (const auto& r : comparison.rows) {
        out << r.model << "," << format_2f(r.mape_percent) << "," << format_2f(r.mae_lh) << ","
            << format_2f(r.improvement_points) << "\n";
    }
    return out.str();
}

void write_comparison_csv(const std::string& path, const Comparison& comparison) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("write_comparison_csv: cannot open " + path);
    out << comparison_csv(comparison);
}

namespace {
constexpr const char* kReportHeader =
    "model,mape_percent,mae_lh,origins,hours_included,hours_excluded,span_begin,span_end,"
    "config_hash,seed";
}

void write_report_csv(const std::string& path, const MetricReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("write_report_csv: cannot open " + path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(report.config_hash));
    out << kReportHeader << "\n";
    out << report.model << "," << format_g17(report.mape_percent) << ","
        << format_g17(report.mae_lh) << "," << report.origins << "," << report.hours_included
        << "," << report.hours_excluded << "," << report.span_begin << "," << report.span_end
        << "," << hash << "," << report.seed << "\n";
}

MetricReport load_report_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("load_report_csv: cannot open " + path);
    std::string header, row;
    if (!std::getline(in, header) || header != kReportHeader) {
        throw ParseError("load_report_csv: unexpected header in " + path);
    }
    if (!std::getline(in, row)) throw ParseError("load_report_csv: missing data row in " + path);
    const auto fields = split_csv_line(row);
    if (fields.size() != 10) throw ParseError("load_report_csv: malformed row in " + path);
    MetricReport report;
    try {
        report.model = fields[0];
        report.mape_percent = std::stod(fields[1]);
        report.mae_lh = std::stod(fields[2]);
        report.origins = std::stoull(fields[3]);
        report.hours_included = std::stoull(fields[4]);
        report.hours_excluded = std::stoull(fields[5]);
        report.span_begin = std::stoull(fields[6]);
        report.span_end = std::stoull(fields[7]);
        report.config_hash = std::stoull(fields[8], nullptr, 16);
        report.seed = std::stoull(fields[9]);
    } catch (const std::exception&) {
        throw ParseError("load_report_csv: malformed value in " + path);
    }
    return report;
}

}  // namespace wdf::eval
