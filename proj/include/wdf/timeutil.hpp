#pragma once

#include <cstdint>
#include <string>

namespace wdf::time {

// All series timestamps are UTC hours since the Unix epoch ("hour stamps").
// Week-hour and calendar-day computations apply a configurable local-time
// offset; Monday 00:00 local is week-hour 0.
using HourStamp = std::int64_t;

constexpr int kHoursPerDay = 24;
constexpr int kHoursPerWeek = 168;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    bool operator==(const CivilDate&) const = default;
    auto operator<=>(const CivilDate&) const = default;
};

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

// Parses "YYYY-MM-DD". Throws ParseError on malformed input.
CivilDate parse_date(const std::string& text);

// Parses ISO 8601 timestamps of the form "YYYY-MM-DD[T ]HH:MM[:SS][Z]"
// and floors to the hour. Throws ParseError on malformed input.
HourStamp parse_hour(const std::string& text);

std::string format_hour(HourStamp h);
std::string format_date(const CivilDate& d);

// Day-of-week with Monday = 0 ... Sunday = 6.
int weekday_of_day(std::int64_t days_since_epoch);

// Local calendar day containing hour `h` given a UTC offset in hours.
std::int64_t local_day(HourStamp h, int utc_offset_hours);

// Hour within the local week, Monday 00:00 = 0 ... Sunday 23:00 = 167.
int week_hour(HourStamp h, int utc_offset_hours);

// Local hour of day, 0..23.
int hour_of_day(HourStamp h, int utc_offset_hours);

// Day-of-week (Monday = 0) of the local day containing `h`.
int weekday(HourStamp h, int utc_offset_hours);

}  // namespace wdf::time
