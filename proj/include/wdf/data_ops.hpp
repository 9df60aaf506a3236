#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wdf/series.hpp"

namespace wdf::data {

enum class GapPolicy {
    interpolate_short,  // linear fill for gaps <= max_gap_hours, error beyond
    zero_fill,          // zeros for every gap regardless of length
    drop_meter,         // linear fill short gaps, signal drop for longer ones
};

GapPolicy gap_policy_from_string(const std::string& name);
std::string to_string(GapPolicy policy);

struct ResampleResult {
    std::optional<MeterSeries> series;  // empty when the meter was dropped
    int filled_hours = 0;
    int longest_gap = 0;
    bool dropped = false;
};

// Fills internal gaps (NaN runs) of an hour-aligned series according to the
// policy. Gaps longer than max_gap_hours raise UnfillableGapError under
// interpolate_short and mark the meter dropped under drop_meter.
ResampleResult resample_hourly(const MeterSeries& series, GapPolicy policy, int max_gap_hours);

// Element-wise sum of meters sharing one grid. Throws AlignmentError on grid
// mismatch and InvalidArgumentError on missing values or an empty meter list.
DemandSeries aggregate_dma(const std::vector<MeterSeries>& meters, const std::string& label = "DMA-total");

// Chronological train/val/test split: test = final test_weeks*168 hours,
// val = floor(val_fraction * remaining hours), train = prefix.
SplitRanges chronological_split(std::size_t total_hours, int test_weeks = 26, double val_fraction = 0.10);

}  // namespace wdf::data
