#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace apiary {

// Injectable time source. Daemons, sinks and probes never call the system
// clock directly; tests and the trace replayer substitute a VirtualClock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

// Time only moves when advanced or slept; sleep_ms advances immediately so
// paced loops (stream frames, probe delays) stay deterministic and fast.
class VirtualClock : public Clock {
public:
    explicit VirtualClock(std::int64_t start_ms = 0) : now_(start_ms) {}
    std::int64_t now_ms() override { return now_.load(); }
    void sleep_ms(std::int64_t ms) override {
        if (ms > 0) now_ += ms;
    }
    void advance_to(std::int64_t ms) {
        std::int64_t cur = now_.load();
        while (cur < ms && !now_.compare_exchange_weak(cur, ms)) {
        }
    }

private:
    std::atomic<std::int64_t> now_;
};

// RFC 3339 with millisecond precision and trailing Z: 2021-03-01T00:00:00.000Z
std::string format_rfc3339_ms(std::int64_t ms_since_epoch);
std::optional<std::int64_t> parse_rfc3339_ms(std::string_view text);

// YYYYMMDD in UTC, for daily log file names.
std::string format_yyyymmdd(std::int64_t ms_since_epoch);

// RFC 7231 date (e.g. "Mon, 01 Mar 2021 00:00:00 GMT") for HTTP headers.
std::string format_http_date(std::int64_t ms_since_epoch);

}  // namespace apiary
