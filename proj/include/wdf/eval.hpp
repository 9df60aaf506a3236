#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wdf/forecaster.hpp"

// Rolling-origin evaluation: error metrics with the zero-demand exclusion
// policy, the model-agnostic backtest harness every forecaster runs through,
// and the comparison table the CLI prints.
namespace wdf::eval {

using forecaster::ForecastRecord;

// MAPE is reported in percent; hours whose actual demand is at or below
// epsilon are excluded from the mean and counted instead of inflating it.
struct MapeBreakdown {
    double percent = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
};

// 100 * mean over included hours of |a - f| / a. Length mismatch raises
// InvalidArgumentError; when no hour survives the epsilon filter the metric
// is undefined and UndefinedMetricError is raised.
MapeBreakdown mape_breakdown(const std::vector<double>& actual,
                             const std::vector<double>& forecast, double epsilon = 1e-6);
double mape(const std::vector<double>& actual, const std::vector<double>& forecast,
            double epsilon = 1e-6);

// 1000 * mean |a - f|: absolute error in liters per hour for m^3/h series.
double mae_lh(const std::vector<double>& actual, const std::vector<double>& forecast);

struct MetricReport {
    std::string model;
    double mape_percent = 0.0;
    double mae_lh = 0.0;
    std::size_t origins = 0;
    std::size_t hours_included = 0;
    std::size_t hours_excluded = 0;
    std::size_t span_begin = 0;  // evaluated range [begin, end) in hours
    std::size_t span_end = 0;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<ForecastRecord> records;  // one per evaluated origin
};

struct PooledMetrics {
    double mape_percent = 0.0;
    double mae_lh = 0.0;
    std::size_t hours_included = 0;
    std::size_t hours_excluded = 0;
};

// Metrics over per-origin records, the single code path behind every report,
// so re-computing from an exported forecast CSV reproduces the report
// bit for bit. `per_day_average` switches MAPE from pooling all hours to
// averaging per-origin MAPEs (origins with every hour excluded are skipped);
// MAE always pools hours. Records must carry actuals of forecast length.
PooledMetrics pool_metrics(const std::vector<ForecastRecord>& records, double epsilon = 1e-6,
                           bool per_day_average = false);

// A forecast callable: horizon demand values (m^3/h) from one origin hour.
using ForecastFn = std::function<std::vector<double>(std::size_t)>;

struct RollingOptions {
    std::size_t stride = 24;  // hours between consecutive origins
    int horizon = 24;
    double epsilon = 1e-6;
    bool per_day_average = false;
    std::uint64_t config_hash = 0;  // stamped into the report
    std::uint64_t seed = 0;
};

// Backtests `forecast_at` from every stride-aligned origin in the test range
// (t = test_begin, test_begin + stride, ... while t + horizon <= test_end)
// and pools the errors over all forecasted hours. Model errors propagate.
MetricReport rolling_evaluate(const std::string& model_name, const ForecastFn& forecast_at,
                              const std::vector<double>& actual, std::size_t test_begin,
                              std::size_t test_end, const RollingOptions& options = {});

struct ComparisonRow {
    std::string model;
    double mape_percent = 0.0;
    double mae_lh = 0.0;
    double improvement_points = 0.0;  // baseline MAPE minus this model's MAPE
};

struct Comparison {
    std::string baseline;
    std::vector<ComparisonRow> rows;  // sorted by model name
};

// One row per report with an improvement column measured against the named
// baseline report. Rows are sorted by model name, so input order cannot
// change the table. Reports must share the evaluation span (ConflictError)
// and carry distinct model names, and the baseline must be among them
// (InvalidArgumentError otherwise).
Comparison compare_models(const std::vector<MetricReport>& reports,
                          const std::string& baseline = "wavelet_cnn_ablation");

std::string comparison_text(const Comparison& comparison);
std::string comparison_csv(const Comparison& comparison);
void write_comparison_csv(const std::string& path, const Comparison& comparison);

// Single-row CSV with the pooled numbers, span, config hash (hex), seed and
// exclusion counts; the per-origin records travel in the forecast CSV.
void write_report_csv(const std::string& path, const MetricReport& report);
MetricReport load_report_csv(const std::string& path);  // records left empty

}  // namespace wdf::eval
