#include "clock.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <thread>

namespace apiary {

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

namespace {
std::tm utc_tm(std::int64_t ms) {
    std::time_t secs = static_cast<std::time_t>(ms / 1000);
    if (ms < 0 && ms % 1000 != 0) --secs;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    return tm;
}
}  // namespace

std::string format_rfc3339_ms(std::int64_t ms) {
    std::tm tm = utc_tm(ms);
    int millis = static_cast<int>(((ms % 1000) + 1000) % 1000);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec, millis);
    return buf;
}

std::optional<std::int64_t> parse_rfc3339_ms(std::string_view text) {
    int y, mo, d, h, mi, s;
    int ms = 0;
    char tail[8] = {0};
    std::string str(text);
    int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%1s", &y, &mo,
                        &d, &h, &mi, &s, &ms, tail);
    if (n == 8) {
        if (tail[0] != 'Z') return std::nullopt;
    } else {
        ms = 0;
        n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%1s", &y, &mo, &d,
                        &h, &mi, &s, tail);
        if (n != 7 || tail[0] != 'Z') return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        return std::nullopt;
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    std::time_t secs = timegm(&tm);
    if (secs == -1) return std::nullopt;
    return static_cast<std::int64_t>(secs) * 1000 + ms;
}

std::string format_yyyymmdd(std::int64_t ms) {
    std::tm tm = utc_tm(ms);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

std::string format_http_date(std::int64_t ms) {
    std::tm tm = utc_tm(ms);
    char buf[48];
    std::strftime(buf, sizeof(buf), "%a, %d %b %Y %H:%M:%S GMT", &tm);
    return buf;
}

}  // namespace apiary
