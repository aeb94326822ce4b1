#include <doctest.h>

#include <string>

#include "httpmsg.h"
#include "net.h"
#include "util.h"

using namespace apiary;

namespace {

HttpParseResult parse_one(const std::string& wire,
                          std::int64_t max_body = 1 << 20) {
    MemStream stream(wire);
    LineReader reader(stream, 8192);
    return read_http_request(reader, max_body);
}

}  // namespace

TEST_CASE("request line, headers and body parse in wire order") {
    auto r = parse_one(
        "POST /password.htm?lang=en HTTP/1.1\r\n"
        "Host: 192.168.0.20\r\n"
        "content-length: 11\r\n"
        "X-Junk:   padded value  \r\n"
        "\r\n"
        "new_pw=1234");
    REQUIRE(r.status == HttpParseStatus::ok);
    CHECK(r.request.method == "POST");
    CHECK(r.request.target == "/password.htm?lang=en");
    CHECK(r.request.version == "HTTP/1.1");
    CHECK(r.request.path() == "/password.htm");
    CHECK(r.request.query() == "lang=en");
    REQUIRE(r.request.headers.size() == 3);
    CHECK(r.request.headers[0].first == "Host");
    CHECK(r.request.headers[1].first == "content-length");
    CHECK(r.request.headers[2].second == "padded value");
    CHECK(r.request.body == "new_pw=1234");
    CHECK(r.request.header("CONTENT-LENGTH").value() == "11");
    CHECK(r.request.header("host").value() == "192.168.0.20");
    CHECK(!r.request.header("Cookie").has_value());
}

TEST_CASE("bare-LF line endings are accepted") {
    auto r = parse_one("GET / HTTP/1.0\nHost: cam\n\n");
    REQUIRE(r.status == HttpParseStatus::ok);
    CHECK(r.request.method == "GET");
    CHECK(r.request.target == "/");
    CHECK(r.request.header("Host").value() == "cam");
}

TEST_CASE("missing version defaults to HTTP/1.0") {
    auto r = parse_one("GET /video.htm\r\n\r\n");
    REQUIRE(r.status == HttpParseStatus::ok);
    CHECK(r.request.version == "HTTP/1.0");
}

TEST_CASE("a few leading blank lines are tolerated") {
    auto r = parse_one("\r\n\r\nGET / HTTP/1.1\r\n\r\n");
    CHECK(r.status == HttpParseStatus::ok);
}

TEST_CASE("empty connection reports closed") {
    auto r = parse_one("");
    CHECK(r.status == HttpParseStatus::closed);
}

TEST_CASE("malformed request lines are flagged with the raw prefix") {
    SUBCASE("no spaces at all") {
        auto r = parse_one("NONSENSE\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
        CHECK(r.raw_prefix == "NONSENSE");
    }
    SUBCASE("binary junk method") {
        auto r = parse_one("\x01\x02\x03 / HTTP/1.1\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
    }
    SUBCASE("bad protocol version") {
        auto r = parse_one("GET / SPEAK/9\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
    }
    SUBCASE("header without a colon") {
        auto r = parse_one("GET / HTTP/1.1\r\nNoColonHere\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
        CHECK(contains(r.raw_prefix, "NoColonHere"));
    }
    SUBCASE("header name with spaces") {
        auto r = parse_one("GET / HTTP/1.1\r\nBad Name: x\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
    }
    SUBCASE("unparseable content length") {
        auto r = parse_one("GET / HTTP/1.1\r\nContent-Length: ten\r\n\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
    }
    SUBCASE("eof inside headers") {
        auto r = parse_one("GET / HTTP/1.1\r\nHost: cam\r\n");
        CHECK(r.status == HttpParseStatus::malformed);
    }
    SUBCASE("header flood") {
        std::string wire = "GET / HTTP/1.1\r\n";
        for (int i = 0; i < 250; ++i)
            wire += "X-H" + std::to_string(i) + ": v\r\n";
        wire += "\r\n";
        auto r = parse_one(wire);
        CHECK(r.status == HttpParseStatus::malformed);
    }
}

TEST_CASE("content length above the cap keeps a prefix and drains the rest") {
    std::string body(3000, 'A');
    auto r = parse_one("POST /upgrade.cgi HTTP/1.1\r\nContent-Length: 3000\r\n\r\n" +
                           body + "GET / HTTP/1.1\r\n\r\n",
                       1024);
    REQUIRE(r.status == HttpParseStatus::body_too_large);
    CHECK(r.request.body == std::string(1024, 'A'));
}

TEST_CASE("pipelined requests parse back to back") {
    MemStream stream(
        "POST /users.htm HTTP/1.1\r\nContent-Length: 4\r\n\r\nabcd"
        "GET /video.htm HTTP/1.1\r\nHost: cam\r\n\r\n");
    LineReader reader(stream, 8192);
    auto first = read_http_request(reader, 1 << 20);
    REQUIRE(first.status == HttpParseStatus::ok);
    CHECK(first.request.body == "abcd");
    auto second = read_http_request(reader, 1 << 20);
    REQUIRE(second.status == HttpParseStatus::ok);
    CHECK(second.request.target == "/video.htm");
    auto third = read_http_request(reader, 1 << 20);
    CHECK(third.status == HttpParseStatus::closed);
}

TEST_CASE("url decoding") {
    CHECK(url_decode("%41%42c") == "ABc");
    CHECK(url_decode("a+b") == "a b");
    CHECK(url_decode("%zz") == "%zz");
    CHECK(url_decode("100%") == "100%");
    CHECK(url_decode("%4") == "%4");
    CHECK(url_decode("") == "");
    CHECK(url_decode("%2Fetc%2fpasswd") == "/etc/passwd");
}

TEST_CASE("query parsing keeps wire order and decodes both sides") {
    auto q = parse_query("user=admin&pwd=12%2034&flag&=empty");
    REQUIRE(q.size() == 4);
    CHECK(q[0] == std::pair<std::string, std::string>("user", "admin"));
    CHECK(q[1] == std::pair<std::string, std::string>("pwd", "12 34"));
    CHECK(q[2] == std::pair<std::string, std::string>("flag", ""));
    CHECK(q[3] == std::pair<std::string, std::string>("", "empty"));
    CHECK(query_param("user=a&user=b", "user").value() == "a");
    CHECK(!query_param("user=a", "pwd").has_value());
    CHECK(parse_query("").empty());
}

TEST_CASE("http date renders imf-fixdate in utc") {
    CHECK(http_date(0) == "Thu, 01 Jan 1970 00:00:00 GMT");
    CHECK(http_date(1700000000000LL) == "Tue, 14 Nov 2023 22:13:20 GMT");
}

TEST_CASE("response head carries an automatic content length") {
    HttpResponse resp;
    resp.status = 404;
    resp.headers.emplace_back("Server", "alphapd/2.1.8");
    resp.body = "gone";
    std::string head = render_http_response_head(resp);
    CHECK(contains(head, "HTTP/1.1 404 Not Found\r\n"));
    CHECK(contains(head, "Server: alphapd/2.1.8\r\n"));
    CHECK(contains(head, "Content-Length: 4\r\n"));
    CHECK(ends_with(head, "\r\n\r\n"));

    resp.suppress_length = true;
    CHECK(!contains(render_http_response_head(resp), "Content-Length"));

    resp.suppress_length = false;
    resp.headers.emplace_back("Content-Length", "99");
    std::string manual = render_http_response_head(resp);
    CHECK(contains(manual, "Content-Length: 99"));
    CHECK(!contains(manual, "Content-Length: 4"));
}

TEST_CASE("write_http_response emits head then body") {
    MemStream stream("");
    HttpResponse resp;
    resp.status = 200;
    resp.body = "hello";
    REQUIRE(write_http_response(stream, resp));
    CHECK(contains(stream.output(), "HTTP/1.1 200 OK\r\n"));
    CHECK(ends_with(stream.output(), "\r\n\r\nhello"));
}
