#include <doctest.h>

#include "clock.h"

using namespace apiary;

TEST_CASE("rfc3339 formatting of known instants") {
    CHECK(format_rfc3339_ms(0) == "1970-01-01T00:00:00.000Z");
    // 2009-02-13T23:31:30.123Z == 1234567890123 ms
    CHECK(format_rfc3339_ms(1234567890123LL) == "2009-02-13T23:31:30.123Z");
    // leap day
    CHECK(format_rfc3339_ms(1709164800000LL) == "2024-02-29T00:00:00.000Z");
}

TEST_CASE("rfc3339 parse round trip") {
    for (std::int64_t ms : {0LL, 1LL, 999LL, 1234567890123LL, 1709164800000LL,
                            4102444799999LL}) {
        auto parsed = parse_rfc3339_ms(format_rfc3339_ms(ms));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == ms);
    }
    CHECK(parse_rfc3339_ms("2024-02-29T00:00:00Z") == 1709164800000LL);
    CHECK_FALSE(parse_rfc3339_ms("2024-02-29 00:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339_ms("2024-02-29T00:00:00").has_value());
    CHECK_FALSE(parse_rfc3339_ms("garbage").has_value());
    CHECK_FALSE(parse_rfc3339_ms("").has_value());
}

TEST_CASE("yyyymmdd for log file naming") {
    CHECK(format_yyyymmdd(0) == "19700101");
    CHECK(format_yyyymmdd(1234567890123LL) == "20090213");
}

TEST_CASE("virtual clock advances on sleep") {
    VirtualClock vc(1000);
    CHECK(vc.now_ms() == 1000);
    vc.sleep_ms(250);
    CHECK(vc.now_ms() == 1250);
    vc.advance_to(2000);
    CHECK(vc.now_ms() == 2000);
    // never moves backwards
    vc.advance_to(1500);
    CHECK(vc.now_ms() == 2000);
}

TEST_CASE("system clock is sane") {
    SystemClock sc;
    std::int64_t t = sc.now_ms();
    // after 2020-01-01, before 2100
    CHECK(t > 1577836800000LL);
    CHECK(t < 4102444800000LL);
}
