#pragma once

#include <map>
#include <string>
#include <vector>

#include "wdf/series.hpp"

namespace wdf::data {

// Column names of the meter CSV; override to ingest foreign headers.
struct MeterCsvSchema {
    std::string meter_id = "meter_id";
    std::string timestamp = "timestamp_iso8601";
    std::string consumption = "consumption_m3h";
};

// Reads a meter CSV into one series per distinct meter_id, sorted by time,
// with unobserved hours flagged as NaN. Duplicate (meter, hour) rows raise
// ConflictError; malformed rows raise ParseError naming the line. Negative
// readings are clipped to 0 with a warning.
std::vector<MeterSeries> load_meter_csv(const std::string& path, const MeterCsvSchema& schema = {});

struct WeatherCsvSchema {
    std::string timestamp = "timestamp_iso8601";
    std::string temp_max = "temp_max_c";
    std::string humidity = "humidity_pct";
};

WeatherSeries load_weather_csv(const std::string& path, const WeatherCsvSchema& schema = {});

// One ISO date (YYYY-MM-DD) per line; blank lines and '#' comments ignored.
HolidayCalendar load_holiday_file(const std::string& path);

void write_meter_csv(const std::string& path, const std::vector<MeterSeries>& meters,
                     const MeterCsvSchema& schema = {});
void write_weather_csv(const std::string& path, const WeatherSeries& weather,
                       const WeatherCsvSchema& schema = {});
void write_holiday_file(const std::string& path, const HolidayCalendar& holidays);

// `meter_id,archetype` pairs (synthetic ground-truth labels).
void write_labels_csv(const std::string& path, const std::map<std::string, std::string>& labels);
std::map<std::string, std::string> load_labels_csv(const std::string& path);

// Demand series in the meter-CSV schema with the label as meter_id.
void write_demand_csv(const std::string& path, const DemandSeries& demand);
DemandSeries load_demand_csv(const std::string& path);

}  // namespace wdf::data
