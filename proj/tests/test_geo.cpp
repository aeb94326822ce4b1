#include <doctest.h>

#include "geo.h"
#include "util.h"

using namespace apiary;

namespace {

GeoTable load(const std::string& text) {
    std::vector<std::string> errors;
    auto table = GeoTable::parse(text, errors);
    REQUIRE_MESSAGE(table.has_value(),
                    "load failed: " << (errors.empty() ? "" : errors[0]));
    return *table;
}

}  // namespace

TEST_CASE("geo longest prefix wins over shorter overlaps") {
    GeoTable t = load(
        "10.0.0.0/8,US\n"
        "10.1.0.0/16,CN\n"
        "10.1.2.0/24,BR\n");
    CHECK(t.size() == 3);
    CHECK(t.match("10.1.2.3") == "BR");
    CHECK(t.match("10.1.9.9") == "CN");
    CHECK(t.match("10.200.0.1") == "US");
    CHECK_FALSE(t.match("11.0.0.1").has_value());
}

TEST_CASE("geo row order does not change the winner") {
    GeoTable a = load("10.0.0.0/8,US\n10.1.0.0/16,CN\n");
    GeoTable b = load("10.1.0.0/16,CN\n10.0.0.0/8,US\n");
    for (const char* addr : {"10.1.2.3", "10.2.2.3"})
        CHECK(a.match(addr) == b.match(addr));
}

TEST_CASE("geo non byte aligned prefix masks correctly") {
    // 192.168.0.0/12 spans 192.160.0.0 through 192.175.255.255
    GeoTable t = load("192.168.0.0/12,DE\n");
    CHECK(t.match("192.160.0.1") == "DE");
    CHECK(t.match("192.175.255.254") == "DE");
    CHECK_FALSE(t.match("192.176.0.1").has_value());
    CHECK_FALSE(t.match("192.159.255.255").has_value());
}

TEST_CASE("geo host routes and catch-all") {
    GeoTable t = load(
        "0.0.0.0/0,ZZ\n"
        "203.0.113.7/32,JP\n");
    CHECK(t.match("203.0.113.7") == "JP");
    CHECK(t.match("203.0.113.8") == "ZZ");
    CHECK(t.match("8.8.8.8") == "ZZ");
}

TEST_CASE("geo v6 prefixes stay separate from v4") {
    GeoTable t = load(
        "2001:db8::/32,DE\n"
        "2001:db8:1::/48,FR\n"
        "0.0.0.0/0,ZZ\n");
    CHECK(t.match("2001:db8::1") == "DE");
    CHECK(t.match("2001:db8:1::42") == "FR");
    // the v4 catch-all must not swallow v6 sources
    CHECK_FALSE(t.match("2001:db9::1").has_value());
    CHECK(t.match("1.2.3.4") == "ZZ");
}

TEST_CASE("geo unparseable lookup address yields no match") {
    GeoTable t = load("0.0.0.0/0,ZZ\n");
    CHECK_FALSE(t.match("not-an-ip").has_value());
    CHECK_FALSE(t.match("").has_value());
    CHECK_FALSE(t.match("300.1.2.3").has_value());
}

TEST_CASE("geo comments and blanks are skipped") {
    GeoTable t = load(
        "# corpus of documentation ranges\n"
        "\n"
        "  198.51.100.0/24 , AU \n"
        "# trailing comment\n");
    CHECK(t.size() == 1);
    CHECK(t.match("198.51.100.77") == "AU");
}

TEST_CASE("geo malformed rows are all reported with line numbers") {
    std::vector<std::string> errors;
    auto table = GeoTable::parse(
        "10.0.0.0/8,US\n"      // 1 fine
        "10.0.0.0/8\n"         // 2 no country
        "10.0.0.0/8,\n"        // 3 empty country
        "10.0.0.0,US\n"        // 4 missing /bits
        "banana/8,US\n"        // 5 bad address
        "10.0.0.0/33,US\n"     // 6 bits beyond v4
        "10.0.0.0/xx,US\n"     // 7 non-numeric bits
        "2001:db8::/129,DE\n"  // 8 bits beyond v6
        "10.0.0.0/8abc,US\n",  // 9 trailing junk after bits
        errors);
    CHECK_FALSE(table.has_value());
    REQUIRE(errors.size() == 8);
    CHECK(contains(errors[0], "line 2"));
    CHECK(contains(errors[1], "line 3"));
    CHECK(contains(errors[2], "line 4"));
    CHECK(contains(errors[3], "line 5"));
    CHECK(contains(errors[3], "banana"));
    CHECK(contains(errors[4], "line 6"));
    CHECK(contains(errors[5], "line 7"));
    CHECK(contains(errors[6], "line 8"));
    CHECK(contains(errors[7], "line 9"));
}

TEST_CASE("geo boundary prefix lengths parse") {
    GeoTable t = load(
        "10.0.0.0/0,A4\n"
        "10.11.12.13/32,B4\n"
        "::/0,A6\n"
        "2001:db8::1/128,B6\n");
    CHECK(t.match("10.11.12.13") == "B4");
    CHECK(t.match("99.99.99.99") == "A4");
    CHECK(t.match("2001:db8::1") == "B6");
    CHECK(t.match("fe80::1") == "A6");
}

TEST_CASE("geo missing file is a load error") {
    std::vector<std::string> errors;
    auto table = GeoTable::load_file("/nonexistent/geo.csv", errors);
    CHECK_FALSE(table.has_value());
    REQUIRE(errors.size() == 1);
    CHECK(contains(errors[0], "cannot open"));
}
