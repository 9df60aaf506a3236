#include "wdf/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "wdf/errors.hpp"

namespace wdf::profiles {

WeeklyProfile weekly_profile(const MeterSeries& meter, std::size_t begin, std::size_t end,
                             int utc_offset_hours) {
    if (end > meter.values.size() || begin > end) {
        throw InvalidArgumentError("weekly_profile: range outside the series");
    }
    if (end - begin < static_cast<std::size_t>(time::kHoursPerWeek)) {
        throw InsufficientDataError("weekly_profile: range of " + std::to_string(end - begin) +
                                    " h is shorter than one week");
    }
    WeeklyProfile profile;
    profile.meter_id = meter.meter_id;
    profile.values.assign(time::kHoursPerWeek, 0.0);
    std::vector<int> counts(time::kHoursPerWeek, 0);
    for (std::size_t i = begin; i < end; ++i) {
        if (std::isnan(meter.values[i])) {
            throw InvalidArgumentError("weekly_profile: meter '" + meter.meter_id +
                                       "' has a gap inside the range");
        }
        const int wh = time::week_hour(meter.start + static_cast<time::HourStamp>(i), utc_offset_hours);
        profile.values[wh] += meter.values[i];
        counts[wh] += 1;
    }
    for (int wh = 0; wh < time::kHoursPerWeek; ++wh) {
        profile.values[wh] /= counts[wh];
    }
    return profile;
}

int window_count(std::size_t span_hours, int window_weeks, int stride_weeks) {
    const std::size_t window_h = static_cast<std::size_t>(window_weeks) * time::kHoursPerWeek;
    const std::size_t stride_h = static_cast<std::size_t>(stride_weeks) * time::kHoursPerWeek;
    if (span_hours < window_h) return 0;
    return static_cast<int>((span_hours - window_h) / stride_h) + 1;
}

std::vector<WeeklyProfile> windowed_profiles(const MeterSeries& meter, std::size_t begin,
                                             std::size_t end, int utc_offset_hours,
                                             int window_weeks, int stride_weeks) {
    if (window_weeks < 1 || stride_weeks < 1) {
        throw InvalidArgumentError("windowed_profiles: window and stride must be >= 1 week");
    }
    const int count = window_count(end - begin, window_weeks, stride_weeks);
    if (count == 0) {
        throw InsufficientDataError("windowed_profiles: span of " + std::to_string(end - begin) +
                                    " h is shorter than the " + std::to_string(window_weeks) +
                                    "-week window");
    }
    const std::size_t window_h = static_cast<std::size_t>(window_weeks) * time::kHoursPerWeek;
    const std::size_t stride_h = static_cast<std::size_t>(stride_weeks) * time::kHoursPerWeek;
    std::vector<WeeklyProfile> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
        const std::size_t w_begin = begin + static_cast<std::size_t>(w) * stride_h;
        out.push_back(weekly_profile(meter, w_begin, w_begin + window_h, utc_offset_hours));
    }
    return out;
}

ProfileSample build_sample(const MeterSeries& meter, std::size_t begin, std::size_t end,
                           int utc_offset_hours, int window_index, int window_weeks,
                           int stride_weeks) {
    const WeeklyProfile global = weekly_profile(meter, begin, end, utc_offset_hours);
    const int count = window_count(end - begin, window_weeks, stride_weeks);
    if (window_index < 0 || window_index >= count) {
        throw InvalidArgumentError("build_sample: window " + std::to_string(window_index) +
                                   " out of range (have " + std::to_string(count) + ")");
    }
    const std::size_t stride_h = static_cast<std::size_t>(stride_weeks) * time::kHoursPerWeek;
    const std::size_t window_h = static_cast<std::size_t>(window_weeks) * time::kHoursPerWeek;
    const std::size_t w_begin = begin + static_cast<std::size_t>(window_index) * stride_h;
    const WeeklyProfile windowed = weekly_profile(meter, w_begin, w_begin + window_h, utc_offset_hours);

    double mean = 0.0;
    for (double v : global.values) mean += v;
    mean /= global.values.size();
    double var = 0.0;
    for (double v : global.values) var += (v - mean) * (v - mean);
    var /= global.values.size();
    const double std_floor = std::max(std::sqrt(var), 1e-6);

    ProfileSample sample;
    sample.meter_id = meter.meter_id;
    sample.window_index = window_index;
    sample.tensor.resize(static_cast<std::size_t>(ProfileSample::rows) * ProfileSample::cols);
    for (int h = 0; h < time::kHoursPerWeek; ++h) {
        sample.tensor[static_cast<std::size_t>(h) * 2 + 0] = (global.values[h] - mean) / std_floor;
        sample.tensor[static_cast<std::size_t>(h) * 2 + 1] = (windowed.values[h] - mean) / std_floor;
    }
    return sample;
}

CropPair crop_views(const ProfileSample& sample) {
    CropPair pair;
    pair.view_a.offset = 0;
    pair.view_a.tensor.assign(sample.tensor.begin(), sample.tensor.begin() + 120 * 2);
    pair.view_b.offset = 96;
    pair.view_b.tensor.assign(sample.tensor.begin() + 96 * 2, sample.tensor.end());
    return pair;
}

}  // namespace wdf::profiles
