#include "wdf/timeutil.hpp"

#include <cctype>
#include <cstdio>

#include "wdf/errors.hpp"

namespace wdf::time {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    const unsigned m = d.month;
    const unsigned day = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);              // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;             // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), m, day};
}

namespace {

bool read_uint(const std::string& s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

bool in_range(unsigned v, unsigned lo, unsigned hi) { return v >= lo && v <= hi; }

}  // namespace

CivilDate parse_date(const std::string& text) {
    unsigned y, m, d;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !read_uint(text, 0, 4, y) ||
        !read_uint(text, 5, 2, m) || !read_uint(text, 8, 2, d) || !in_range(m, 1, 12) ||
        !in_range(d, 1, 31)) {
        throw ParseError("malformed date '" + text + "' (expected YYYY-MM-DD)");
    }
    return CivilDate{static_cast<int>(y), m, d};
}

HourStamp parse_hour(const std::string& text) {
    const CivilDate date = parse_date(text);  // validates the date prefix
    if (text.size() < 13 || (text[10] != 'T' && text[10] != ' ')) {
        throw ParseError("malformed timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM[:SS][Z])");
    }
    unsigned hh, mm = 0, ss = 0;
    if (!read_uint(text, 11, 2, hh) || !in_range(hh, 0, 23)) {
        throw ParseError("malformed timestamp '" + text + "' (bad hour)");
    }
    std::size_t pos = 13;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_uint(text, pos + 1, 2, mm) || mm > 59) {
            throw ParseError("malformed timestamp '" + text + "' (bad minute)");
        }
        pos += 3;
        if (pos < text.size() && text[pos] == ':') {
            if (!read_uint(text, pos + 1, 2, ss) || ss > 59) {
                throw ParseError("malformed timestamp '" + text + "' (bad second)");
            }
            pos += 3;
        }
    }
    if (pos < text.size() && text[pos] != 'Z') {
        throw ParseError("malformed timestamp '" + text + "' (trailing characters)");
    }
    if (pos + 1 < text.size()) {
        throw ParseError("malformed timestamp '" + text + "' (trailing characters)");
    }
    return days_from_civil(date) * kHoursPerDay + static_cast<HourStamp>(hh);
}

std::string format_hour(HourStamp h) {
    std::int64_t days = h / kHoursPerDay;
    int hod = static_cast<int>(h % kHoursPerDay);
    if (hod < 0) {
        hod += kHoursPerDay;
        --days;
    }
    const CivilDate d = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00Z", d.year, d.month, d.day, hod);
    return buf;
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

int weekday_of_day(std::int64_t days) {
    // 1970-01-01 was a Thursday (Monday = 0 -> Thursday = 3).
    std::int64_t w = (days + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

std::int64_t local_day(HourStamp h, int utc_offset_hours) {
    std::int64_t lh = h + utc_offset_hours;
    return lh >= 0 ? lh / kHoursPerDay : (lh - (kHoursPerDay - 1)) / kHoursPerDay;
}

int week_hour(HourStamp h, int utc_offset_hours) {
    // Epoch hour 0 is Thursday 00:00 UTC, i.e. week-hour 72.
    std::int64_t wh = (h + utc_offset_hours + 72) % kHoursPerWeek;
    if (wh < 0) wh += kHoursPerWeek;
    return static_cast<int>(wh);
}

int hour_of_day(HourStamp h, int utc_offset_hours) {
    std::int64_t hod = (h + utc_offset_hours) % kHoursPerDay;
    if (hod < 0) hod += kHoursPerDay;
    return static_cast<int>(hod);
}

int weekday(HourStamp h, int utc_offset_hours) { return weekday_of_day(local_day(h, utc_offset_hours)); }

}  // namespace wdf::time
