#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "wdf/timeutil.hpp"

namespace wdf::data {

using time::HourStamp;

// One smart meter's hourly consumption in m^3/h. Missing readings are NaN
// until resampling; after resampling the series is gapless.
struct MeterSeries {
    std::string meter_id;
    HourStamp start = 0;
    std::vector<double> values;

    HourStamp end() const { return start + static_cast<HourStamp>(values.size()); }
    bool has_missing() const {
        for (double v : values)
            if (std::isnan(v)) return true;
        return false;
    }
};

// An aggregated hourly demand series (DMA total or one cluster's total).
struct DemandSeries {
    std::string label;
    HourStamp start = 0;
    std::vector<double> values;

    HourStamp end() const { return start + static_cast<HourStamp>(values.size()); }
    double at(HourStamp h) const { return values.at(static_cast<std::size_t>(h - start)); }
};

struct WeatherSeries {
    HourStamp start = 0;
    std::vector<double> temperature_max;  // degC per hour
    std::vector<double> humidity;         // percent, [0, 100]

    std::size_t size() const { return temperature_max.size(); }
    HourStamp end() const { return start + static_cast<HourStamp>(temperature_max.size()); }
};

struct HolidayCalendar {
    std::set<std::int64_t> days;  // local calendar days (days since epoch)

    bool contains_day(std::int64_t local_day) const { return days.count(local_day) > 0; }
    // Whether the hour falls on a holiday in local time.
    bool covers_hour(HourStamp h, int utc_offset_hours) const {
        return contains_day(time::local_day(h, utc_offset_hours));
    }
};

// Index split of an hourly timeline: [0,train_end) train, [train_end,val_end)
// validation, [val_end,test_end) test. Ranges are contiguous and ordered.
struct SplitRanges {
    std::size_t train_end = 0;
    std::size_t val_end = 0;
    std::size_t test_end = 0;

    std::size_t train_size() const { return train_end; }
    std::size_t val_size() const { return val_end - train_end; }
    std::size_t test_size() const { return test_end - val_end; }
};

// A District Metered Area: meters on one hourly grid plus weather, holidays
// and the chronological split. Immutable after construction by convention.
struct DmaDataset {
    std::vector<MeterSeries> meters;
    WeatherSeries weather;
    HolidayCalendar holidays;
    SplitRanges split;
    int utc_offset_hours = 0;
    // Meters with gaps too long to interpolate keep their observed hours in
    // the DMA aggregate but are excluded from profile building.
    std::vector<std::string> clustering_excluded;

    HourStamp start() const { return meters.empty() ? 0 : meters.front().start; }
    std::size_t hours() const { return meters.empty() ? 0 : meters.front().values.size(); }
    bool is_clustering_eligible(const std::string& meter_id) const {
        for (const auto& id : clustering_excluded)
            if (id == meter_id) return false;
        return true;
    }
};

// Validates the shared-grid invariant. Throws AlignmentError on mismatch.
void check_common_grid(const std::vector<MeterSeries>& meters);

// Validates dataset invariants (grid, weather alignment, split bounds,
// 26-week test span when test_weeks is supplied). Throws on violation.
void validate_dataset(const DmaDataset& dataset, int test_weeks = -1);

}  // namespace wdf::data
