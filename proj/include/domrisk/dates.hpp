#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "domrisk/util.hpp"

namespace domrisk {

/// Proleptic Gregorian calendar date. Comparable by (y, m, d).
struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const CivilDate&) const = default;
};

namespace detail {
// Days from 1970-01-01, Howard Hinnant's civil-days algorithm.
inline int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}
}  // namespace detail

inline bool is_valid_date(const CivilDate& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = mdays[d.month - 1];
    bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) dim = 29;
    return d.day <= dim;
}

inline int64_t to_days(const CivilDate& d) {
    return detail::days_from_civil(d.year, d.month, d.day);
}

inline CivilDate from_days(int64_t days) { return detail::civil_from_days(days); }

inline CivilDate add_days(const CivilDate& d, int64_t n) { return from_days(to_days(d) + n); }

/// Parses "YYYY-MM-DD" (ISO-8601 date). Throws DomriskError on malformed input.
inline CivilDate parse_date(std::string_view s) {
    CivilDate d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        std::sscanf(std::string(s).c_str(), "%4d-%2d-%2d", &d.year, &d.month, &d.day) != 3 ||
        !is_valid_date(d)) {
        throw DomriskError("invalid date: '" + std::string(s) + "'");
    }
    return d;
}

inline std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

/// Second-resolution timestamp used for snapshot indices and page bundles.
struct Timestamp {
    CivilDate date;
    int hour = 0, minute = 0, second = 0;

    auto operator<=>(const Timestamp&) const = default;
};

/// Parses a 14-digit CDX timestamp "YYYYMMDDhhmmss". Shorter prefixes
/// (down to YYYYMMDD) are accepted with missing parts zeroed.
inline Timestamp parse_cdx_timestamp(std::string_view s) {
    if (s.size() < 8 || s.size() > 14) throw DomriskError("invalid cdx timestamp: '" + std::string(s) + "'");
    for (char c : s)
        if (c < '0' || c > '9') throw DomriskError("invalid cdx timestamp: '" + std::string(s) + "'");
    auto num = [&](size_t pos, size_t len) -> int {
        if (pos + len > s.size()) return 0;
        int v = 0;
        for (size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
        return v;
    };
    Timestamp t;
    t.date = CivilDate{num(0, 4), num(4, 2), num(6, 2)};
    t.hour = num(8, 2);
    t.minute = num(10, 2);
    t.second = num(12, 2);
    if (!is_valid_date(t.date) || t.hour > 23 || t.minute > 59 || t.second > 60)
        throw DomriskError("invalid cdx timestamp: '" + std::string(s) + "'");
    return t;
}

inline std::string format_cdx_timestamp(const Timestamp& t) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02d%02d%02d%02d", t.date.year, t.date.month,
                  t.date.day, t.hour, t.minute, t.second);
    return buf;
}

/// RFC 3339 with UTC "Z" suffix, e.g. "2024-05-01T12:30:00Z".
inline std::string format_rfc3339(const Timestamp& t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", t.date.year, t.date.month,
                  t.date.day, t.hour, t.minute, t.second);
    return buf;
}

inline Timestamp parse_rfc3339(std::string_view s) {
    Timestamp t;
    if (s.size() < 20 || s[10] != 'T' ||
        std::sscanf(std::string(s).c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &t.date.year, &t.date.month,
                    &t.date.day, &t.hour, &t.minute, &t.second) != 6 ||
        !is_valid_date(t.date)) {
        throw DomriskError("invalid rfc3339 timestamp: '" + std::string(s) + "'");
    }
    return t;
}

}  // namespace domrisk
