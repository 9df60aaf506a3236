#include "wdf/series.hpp"

#include "wdf/errors.hpp"

namespace wdf::data {

void check_common_grid(const std::vector<MeterSeries>& meters) {
    if (meters.empty()) return;
    const HourStamp start = meters.front().start;
    const std::size_t n = meters.front().values.size();
    for (const auto& m : meters) {
        if (m.start != start || m.values.size() != n) {
            throw AlignmentError("meter '" + m.meter_id + "' is not on the common hourly grid ([" +
                                 time::format_hour(m.start) + ", " + std::to_string(m.values.size()) +
                                 "h] vs [" + time::format_hour(start) + ", " + std::to_string(n) + "h])");
        }
    }
}

void validate_dataset(const DmaDataset& dataset, int test_weeks) {
    check_common_grid(dataset.meters);
    const std::size_t n = dataset.hours();
    if (dataset.weather.size() != n || dataset.weather.start != dataset.start()) {
        throw AlignmentError("weather series is not on the meter grid");
    }
    for (double h : dataset.weather.humidity) {
        if (h < 0.0 || h > 100.0) throw InvalidArgumentError("humidity outside [0, 100]");
    }
    const SplitRanges& s = dataset.split;
    if (!(s.train_end <= s.val_end && s.val_end <= s.test_end && s.test_end <= n)) {
        throw InvalidArgumentError("split ranges are not ordered within the dataset");
    }
    if (test_weeks >= 0) {
        const std::size_t expect = static_cast<std::size_t>(test_weeks) * time::kHoursPerWeek;
        if (s.test_size() != expect) {
            throw InvalidArgumentError("test span is " + std::to_string(s.test_size()) + " h, expected " +
                                       std::to_string(expect) + " h");
        }
    }
}

}  // namespace wdf::data
