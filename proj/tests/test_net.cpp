#include <doctest.h>

#include <thread>

#include "net.h"

using namespace apiary;

TEST_CASE("memstream feeds reads and captures writes") {
    MemStream ms("hello");
    char buf[16];
    int n = ms.read_some(buf, sizeof(buf));
    REQUIRE(n == 5);
    CHECK(std::string(buf, 5) == "hello");
    CHECK(ms.read_some(buf, sizeof(buf)) == 0);

    CHECK(ms.write_all("response"));
    CHECK(ms.output() == "response");
    CHECK(ms.bytes_written() == 8);
}

TEST_CASE("memstream write limit simulates a dropped client") {
    MemStream ms("");
    ms.set_write_limit(4);
    CHECK(ms.write_all("ab"));
    CHECK_FALSE(ms.write_all("cdef"));
    CHECK(ms.output() == "abcd");
}

TEST_CASE("line reader handles crlf, lf and eof without terminator") {
    MemStream ms("one\r\ntwo\nthree");
    LineReader lr(ms);
    CHECK(lr.read_line() == std::string("one"));
    CHECK(lr.read_line() == std::string("two"));
    CHECK(lr.read_line() == std::string("three"));
    CHECK_FALSE(lr.read_line().has_value());
}

TEST_CASE("line reader splits oversized lines instead of growing") {
    std::string big(10000, 'a');
    MemStream ms(big + "\nrest\n");
    LineReader lr(ms, 4096);
    auto l1 = lr.read_line();
    REQUIRE(l1.has_value());
    CHECK(l1->size() == 4096);
    auto l2 = lr.read_line();
    REQUIRE(l2.has_value());
    CHECK(l2->size() == 4096);
    auto l3 = lr.read_line();
    REQUIRE(l3.has_value());
    CHECK(l3->size() == 10000 - 2 * 4096);
    CHECK(lr.read_line() == std::string("rest"));
}

TEST_CASE("tcp listener on an ephemeral port round trips bytes") {
    TcpListener listener;
    std::string err;
    REQUIRE_MESSAGE(listener.open("127.0.0.1", 0, err), err);
    REQUIRE(listener.bound_port() > 0);

    std::thread server([&] {
        auto conn = listener.accept();
        if (!conn) return;
        char buf[64];
        int n = conn->read_some(buf, sizeof(buf));
        if (n > 0) conn->write_all(std::string("echo:") + std::string(buf, n));
        conn->close();
    });

    auto client = tcp_connect("127.0.0.1", listener.bound_port(), 2000, err);
    REQUIRE_MESSAGE(client != nullptr, err);
    CHECK(client->peer_port() == listener.bound_port());
    REQUIRE(client->write_all("ping"));
    std::string got;
    char buf[64];
    for (;;) {
        int n = client->read_some(buf, sizeof(buf));
        if (n <= 0) break;
        got.append(buf, static_cast<std::size_t>(n));
    }
    CHECK(got == "echo:ping");
    server.join();
    listener.close();
}

TEST_CASE("connect to a closed port fails with a message") {
    TcpListener probe;
    std::string err;
    REQUIRE(probe.open("127.0.0.1", 0, err));
    int dead_port = probe.bound_port();
    probe.close();

    auto client = tcp_connect("127.0.0.1", dead_port, 500, err);
    CHECK(client == nullptr);
    CHECK_FALSE(err.empty());
}
