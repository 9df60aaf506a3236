#pragma once

#include <string>
#include <vector>

#include "wdf/forecaster.hpp"
#include "wdf/series.hpp"

// Deterministic SVG emitters for the two desk-scale figures: measured demand
// against rolling forecasts over the test span, and per-cluster demand
// traces. Pure functions of their inputs, so identical runs write identical
// bytes.
namespace wdf::plots {

// Measured demand as one continuous line and each origin's forecast as its
// own segment. Records must be non-empty; hours without actuals are simply
// absent from the measured line.
void write_forecast_svg(const std::string& path,
                        const std::vector<forecaster::ForecastRecord>& records,
                        const std::string& title);

// One line per cluster over hours [begin, end) of the shared grid.
void write_cluster_demand_svg(const std::string& path,
                              const std::vector<data::DemandSeries>& clusters, std::size_t begin,
                              std::size_t end, const std::string& title);

}  // namespace wdf::plots
