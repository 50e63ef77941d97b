#pragma once

#include <cstdint>
#include <string>

namespace pollwait::timeutil {

// Days since 1970-01-01 (can be negative).
using Day = int64_t;
// Seconds since the epoch, UTC.
using Timestamp = int64_t;

constexpr int64_t kSecondsPerDay = 86400;
constexpr int64_t kSecondsPerHour = 3600;

Day days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(Day z, int& y, unsigned& m, unsigned& d);

// "YYYY-MM-DD" -> days since epoch. Throws Error on malformed input.
Day parse_date(const std::string& s);
std::string format_date(Day d);

// Accepts epoch seconds or ISO-8601 "YYYY-MM-DDTHH:MM:SS[Z]" (treated as
// UTC; a space separator is also tolerated).
Timestamp parse_timestamp(const std::string& s);
std::string format_timestamp(Timestamp t);

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

// Local civil day/hour under a fixed UTC offset in hours.
inline Day local_day(Timestamp t, int utc_offset_hours) {
    return floor_div(t + int64_t(utc_offset_hours) * kSecondsPerHour, kSecondsPerDay);
}

inline int local_hour(Timestamp t, int utc_offset_hours) {
    int64_t s = t + int64_t(utc_offset_hours) * kSecondsPerHour;
    int64_t sod = s - floor_div(s, kSecondsPerDay) * kSecondsPerDay;
    return int(sod / kSecondsPerHour);
}

inline Timestamp local_midnight_utc(Day local, int utc_offset_hours) {
    return local * kSecondsPerDay - int64_t(utc_offset_hours) * kSecondsPerHour;
}

} // namespace pollwait::timeutil
