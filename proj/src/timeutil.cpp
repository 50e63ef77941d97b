#include "pollwait/timeutil.hpp"

#include "pollwait/error.hpp"

#include <cstdio>
#include <cstdlib>

namespace pollwait::timeutil {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
Day days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return int64_t(era) * 146097 + int64_t(doe) - 719468;
}

void civil_from_days(Day z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = int64_t(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = int(yr + (m <= 2));
}

Day parse_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw Error("bad date: " + s);
    return days_from_civil(y, m, d);
}

std::string format_date(Day day) {
    int y;
    unsigned m, d;
    civil_from_days(day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

Timestamp parse_timestamp(const std::string& s) {
    if (s.empty()) throw Error("empty timestamp");
    bool digits_only = true;
    for (char c : s)
        if (!(c >= '0' && c <= '9') && c != '-') { digits_only = false; break; }
    if (digits_only && s.find('-', 1) == std::string::npos)
        return std::strtoll(s.c_str(), nullptr, 10);

    int y = 0, hh = 0, mi = 0, ss = 0;
    unsigned mo = 0, dd = 0;
    char sep = 0;
    int n = std::sscanf(s.c_str(), "%d-%u-%u%c%d:%d:%d", &y, &mo, &dd, &sep, &hh, &mi, &ss);
    if (n < 3 || mo < 1 || mo > 12 || dd < 1 || dd > 31)
        throw Error("bad timestamp: " + s);
    if (n >= 4 && sep != 'T' && sep != ' ')
        throw Error("bad timestamp: " + s);
    return days_from_civil(y, mo, dd) * kSecondsPerDay + int64_t(hh) * 3600 + int64_t(mi) * 60 + ss;
}

std::string format_timestamp(Timestamp t) {
    Day z = floor_div(t, kSecondsPerDay);
    int64_t sod = t - z * kSecondsPerDay;
    int y;
    unsigned m, d;
    civil_from_days(z, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", y, m, d, int(sod / 3600),
                  int((sod % 3600) / 60), int(sod % 60));
    return buf;
}

} // namespace pollwait::timeutil
