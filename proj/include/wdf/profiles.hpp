#pragma once

#include <string>
#include <vector>

#include "wdf/series.hpp"

namespace wdf::profiles {

using data::MeterSeries;

// Mean consumption per week-hour; index 0 is Monday 00:00 local.
struct WeeklyProfile {
    std::string meter_id;
    std::vector<double> values;  // length 168
};

// The 168x2 input sample of one (meter, window): column 0 the global weekly
// profile, column 1 one 12-week windowed profile, both z-scored with the
// meter's global-profile statistics. Row-major: tensor[h*2 + col].
struct ProfileSample {
    std::string meter_id;
    int window_index = 0;
    std::vector<double> tensor;  // 168 x 2

    double at(int row, int col) const { return tensor[static_cast<std::size_t>(row) * 2 + col]; }
    static constexpr int rows = 168;
    static constexpr int cols = 2;
};

// One cropped view of a sample; `offset` is the absolute week-hour of row 0,
// which keeps the two views alignable on their shared Friday hours.
struct CropView {
    int offset = 0;
    std::vector<double> tensor;  // row-major n x 2

    int size() const { return static_cast<int>(tensor.size() / 2); }
    double at(int row, int col) const { return tensor[static_cast<std::size_t>(row) * 2 + col]; }
};

struct CropPair {
    CropView view_a;  // week-hours [0, 120): Monday..Friday
    CropView view_b;  // week-hours [96, 168): Friday..Sunday
    int overlap_begin = 96;
    int overlap_end = 120;
};

// Mean per week-hour over [begin, end) of the meter's own timeline. The range
// must cover at least one full week and be gapless.
WeeklyProfile weekly_profile(const MeterSeries& meter, std::size_t begin, std::size_t end,
                             int utc_offset_hours);

// Number of sliding windows a span of `span_hours` admits.
int window_count(std::size_t span_hours, int window_weeks = 12, int stride_weeks = 4);

// Weekly profiles of every sliding window over [begin, end).
std::vector<WeeklyProfile> windowed_profiles(const MeterSeries& meter, std::size_t begin,
                                             std::size_t end, int utc_offset_hours,
                                             int window_weeks = 12, int stride_weeks = 4);

// Stacks the global profile over [begin, end) with the window_index-th
// windowed profile and z-scores both columns by the global profile's
// mean/std (std floored at 1e-6).
ProfileSample build_sample(const MeterSeries& meter, std::size_t begin, std::size_t end,
                           int utc_offset_hours, int window_index, int window_weeks = 12,
                           int stride_weeks = 4);

// Splits a sample into the overlapping Monday–Friday / Friday–Sunday views.
CropPair crop_views(const ProfileSample& sample);

}  // namespace wdf::profiles
