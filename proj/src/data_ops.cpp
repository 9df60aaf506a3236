#include "wdf/data_ops.hpp"

#include <algorithm>
#include <cmath>

#include "wdf/errors.hpp"

namespace wdf::data {

GapPolicy gap_policy_from_string(const std::string& name) {
    if (name == "interpolate_short") return GapPolicy::interpolate_short;
    if (name == "zero_fill") return GapPolicy::zero_fill;
    if (name == "drop_meter") return GapPolicy::drop_meter;
    throw InvalidArgumentError("unknown gap policy '" + name + "'");
}

std::string to_string(GapPolicy policy) {
    switch (policy) {
        case GapPolicy::interpolate_short: return "interpolate_short";
        case GapPolicy::zero_fill: return "zero_fill";
        case GapPolicy::drop_meter: return "drop_meter";
    }
    return "?";
}

ResampleResult resample_hourly(const MeterSeries& series, GapPolicy policy, int max_gap_hours) {
    if (max_gap_hours < 0) throw InvalidArgumentError("max_gap_hours must be >= 0");
    ResampleResult out;
    MeterSeries filled = series;
    auto& v = filled.values;

    std::size_t i = 0;
    while (i < v.size()) {
        if (!std::isnan(v[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < v.size() && std::isnan(v[j])) ++j;
        const int gap = static_cast<int>(j - i);
        out.longest_gap = std::max(out.longest_gap, gap);
        const bool at_edge = (i == 0 || j == v.size());

        switch (policy) {
            case GapPolicy::zero_fill:
                std::fill(v.begin() + i, v.begin() + j, 0.0);
                out.filled_hours += gap;
                break;
            case GapPolicy::interpolate_short:
            case GapPolicy::drop_meter: {
                if (gap > max_gap_hours || at_edge) {
                    if (policy == GapPolicy::drop_meter) {
                        out.dropped = true;
                        return out;
                    }
                    throw UnfillableGapError("meter '" + series.meter_id + "': " + std::to_string(gap) +
                                             "-hour gap exceeds max_gap_hours=" + std::to_string(max_gap_hours) +
                                             (at_edge ? " (edge gap)" : ""));
                }
                const double lo = v[i - 1];
                const double hi = v[j];
                for (std::size_t k = i; k < j; ++k) {
                    const double t = static_cast<double>(k - i + 1) / static_cast<double>(gap + 1);
                    v[k] = lo + (hi - lo) * t;
                }
                out.filled_hours += gap;
                break;
            }
        }
        i = j;
    }
    out.series = std::move(filled);
    return out;
}

DemandSeries aggregate_dma(const std::vector<MeterSeries>& meters, const std::string& label) {
    if (meters.empty()) throw InvalidArgumentError("aggregate_dma: no meters");
    check_common_grid(meters);
    DemandSeries total;
    total.label = label;
    total.start = meters.front().start;
    total.values.assign(meters.front().values.size(), 0.0);
    for (const auto& m : meters) {
        for (std::size_t t = 0; t < m.values.size(); ++t) {
            if (std::isnan(m.values[t])) {
                throw InvalidArgumentError("aggregate_dma: meter '" + m.meter_id + "' has missing values");
            }
            total.values[t] += m.values[t];
        }
    }
    return total;
}

SplitRanges chronological_split(std::size_t total_hours, int test_weeks, double val_fraction) {
    if (test_weeks < 0) throw InvalidArgumentError("test_weeks must be >= 0");
    if (val_fraction < 0.0 || val_fraction >= 1.0) throw InvalidArgumentError("val_fraction must be in [0, 1)");
    const std::size_t test_span = static_cast<std::size_t>(test_weeks) * time::kHoursPerWeek;
    if (total_hours < test_span + time::kHoursPerWeek) {
        throw InsufficientDataError("history of " + std::to_string(total_hours) + " h cannot hold a " +
                                    std::to_string(test_weeks) + "-week test span plus context");
    }
    SplitRanges s;
    s.test_end = total_hours;
    const std::size_t remaining = total_hours - test_span;
    const std::size_t val_len = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(remaining)));
    s.val_end = remaining;
    s.train_end = remaining - val_len;
    return s;
}

}  // namespace wdf::data
