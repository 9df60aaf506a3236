#include "wdf/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "wdf/errors.hpp"
#include "wdf/log.hpp"

namespace wdf::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& path) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ParseError(path + ": missing required column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

double parse_double(const std::string& text, std::size_t line_no, const std::string& what) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(text, &consumed);
        if (consumed != text.size() || !std::isfinite(v)) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("unparseable " + what + " '" + text + "'", line_no);
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<MeterSeries> load_meter_csv(const std::string& path, const MeterCsvSchema& schema) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = split_line(line);
    const std::size_t id_col = column_index(header, schema.meter_id, path);
    const std::size_t ts_col = column_index(header, schema.timestamp, path);
    const std::size_t val_col = column_index(header, schema.consumption, path);
    const std::size_t min_cols = std::max({id_col, ts_col, val_col}) + 1;

    struct Raw {
        std::unordered_map<time::HourStamp, double> readings;
        time::HourStamp lo = 0, hi = 0;
    };
    std::unordered_map<std::string, Raw> by_meter;
    std::vector<std::string> order;  // first-appearance order of meter ids
    int clipped = 0;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() < min_cols) {
            throw ParseError("expected at least " + std::to_string(min_cols) + " columns, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        const std::string& id = fields[id_col];
        if (id.empty()) throw ParseError("empty meter_id", line_no);
        time::HourStamp hour;
        try {
            hour = time::parse_hour(fields[ts_col]);
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()), line_no);
        }
        double value = parse_double(fields[val_col], line_no, "consumption");
        if (value < 0.0) {
            value = 0.0;
            ++clipped;
        }
        auto [it, inserted] = by_meter.try_emplace(id);
        Raw& raw = it->second;
        if (inserted) {
            order.push_back(id);
            raw.lo = raw.hi = hour;
        } else {
            raw.lo = std::min(raw.lo, hour);
            raw.hi = std::max(raw.hi, hour);
        }
        if (!raw.readings.emplace(hour, value).second) {
            throw ConflictError("duplicate reading for meter '" + id + "' at " + time::format_hour(hour) +
                                " (line " + std::to_string(line_no) + ")");
        }
    }
    if (clipped > 0) {
        log::warn(path + ": clipped " + std::to_string(clipped) + " negative reading(s) to 0");
    }

    std::vector<MeterSeries> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        const Raw& raw = by_meter[id];
        MeterSeries series;
        series.meter_id = id;
        series.start = raw.lo;
        series.values.assign(static_cast<std::size_t>(raw.hi - raw.lo + 1),
                             std::numeric_limits<double>::quiet_NaN());
        for (const auto& [hour, value] : raw.readings) {
            series.values[static_cast<std::size_t>(hour - raw.lo)] = value;
        }
        out.push_back(std::move(series));
    }
    std::sort(out.begin(), out.end(),
              [](const MeterSeries& a, const MeterSeries& b) { return a.meter_id < b.meter_id; });
    return out;
}

WeatherSeries load_weather_csv(const std::string& path, const WeatherCsvSchema& schema) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = split_line(line);
    const std::size_t ts_col = column_index(header, schema.timestamp, path);
    const std::size_t t_col = column_index(header, schema.temp_max, path);
    const std::size_t h_col = column_index(header, schema.humidity, path);
    const std::size_t min_cols = std::max({ts_col, t_col, h_col}) + 1;

    std::vector<std::pair<time::HourStamp, std::pair<double, double>>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() < min_cols) throw ParseError("too few columns", line_no);
        time::HourStamp hour;
        try {
            hour = time::parse_hour(fields[ts_col]);
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()), line_no);
        }
        const double temp = parse_double(fields[t_col], line_no, "temperature");
        const double hum = parse_double(fields[h_col], line_no, "humidity");
        if (hum < 0.0 || hum > 100.0) throw ParseError("humidity outside [0, 100]", line_no);
        rows.emplace_back(hour, std::make_pair(temp, hum));
    }
    if (rows.empty()) throw ParseError(path + ": no weather rows");
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    WeatherSeries weather;
    weather.start = rows.front().first;
    const std::size_t n = static_cast<std::size_t>(rows.back().first - rows.front().first + 1);
    weather.temperature_max.assign(n, std::numeric_limits<double>::quiet_NaN());
    weather.humidity.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (const auto& [hour, th] : rows) {
        const std::size_t idx = static_cast<std::size_t>(hour - weather.start);
        if (!std::isnan(weather.temperature_max[idx])) {
            throw ConflictError("duplicate weather row at " + time::format_hour(hour));
        }
        weather.temperature_max[idx] = th.first;
        weather.humidity[idx] = th.second;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(weather.temperature_max[i])) {
            throw ParseError(path + ": weather grid has a gap at " +
                             time::format_hour(weather.start + static_cast<time::HourStamp>(i)));
        }
    }
    return weather;
}

HolidayCalendar load_holiday_file(const std::string& path) {
    std::ifstream in = open_in(path);
    HolidayCalendar cal;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        try {
            cal.days.insert(time::days_from_civil(time::parse_date(line)));
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()), line_no);
        }
    }
    return cal;
}

void write_meter_csv(const std::string& path, const std::vector<MeterSeries>& meters,
                     const MeterCsvSchema& schema) {
    std::ofstream out = open_out(path);
    out << schema.meter_id << ',' << schema.timestamp << ',' << schema.consumption << '\n';
    for (const auto& m : meters) {
        for (std::size_t t = 0; t < m.values.size(); ++t) {
            if (std::isnan(m.values[t])) continue;  // unobserved hours are simply absent
            out << m.meter_id << ',' << time::format_hour(m.start + static_cast<time::HourStamp>(t))
                << ',' << fmt_value(m.values[t]) << '\n';
        }
    }
}

void write_weather_csv(const std::string& path, const WeatherSeries& weather,
                       const WeatherCsvSchema& schema) {
    std::ofstream out = open_out(path);
    out << schema.timestamp << ',' << schema.temp_max << ',' << schema.humidity << '\n';
    for (std::size_t t = 0; t < weather.size(); ++t) {
        out << time::format_hour(weather.start + static_cast<time::HourStamp>(t)) << ','
            << fmt_value(weather.temperature_max[t]) << ',' << fmt_value(weather.humidity[t]) << '\n';
    }
}

void write_holiday_file(const std::string& path, const HolidayCalendar& holidays) {
    std::ofstream out = open_out(path);
    for (std::int64_t day : holidays.days) {
        out << time::format_date(time::civil_from_days(day)) << '\n';
    }
}

void write_labels_csv(const std::string& path, const std::map<std::string, std::string>& labels) {
    std::ofstream out = open_out(path);
    out << "meter_id,archetype\n";
    for (const auto& [id, kind] : labels) out << id << ',' << kind << '\n';
}

std::map<std::string, std::string> load_labels_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::map<std::string, std::string> labels;
    std::string line;
    std::getline(in, line);  // header
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != 2) throw ParseError("expected meter_id,archetype", line_no);
        labels[fields[0]] = fields[1];
    }
    return labels;
}

void write_demand_csv(const std::string& path, const DemandSeries& demand) {
    MeterSeries as_meter{demand.label, demand.start, demand.values};
    write_meter_csv(path, {as_meter});
}

DemandSeries load_demand_csv(const std::string& path) {
    auto meters = load_meter_csv(path);
    if (meters.size() != 1) {
        throw ParseError(path + ": expected a single demand series, found " + std::to_string(meters.size()));
    }
    if (meters[0].has_missing()) throw ParseError(path + ": demand series has gaps");
    return DemandSeries{meters[0].meter_id, meters[0].start, std::move(meters[0].values)};
}

}  // namespace wdf::data
