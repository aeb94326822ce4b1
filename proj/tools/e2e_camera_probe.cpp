// Ad-hoc end-to-end probe: serves the camera honeypot on an ephemeral TCP
// port, performs the 401 challenge / basic auth / snapshot / bounded stream
// dialogue plus one signature-bearing attack request, and checks the
// emitted .jsonl log. Exit 0 on success.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "artifact_store.h"
#include "camera.h"
#include "clock.h"
#include "event.h"
#include "net.h"
#include "rng.h"
#include "signatures.h"
#include "sinks.h"
#include "util.h"

using namespace apiary;

namespace {

std::string slurp(ByteStream& conn) {
    std::string out;
    char buf[4096];
    for (;;) {
        int n = conn.read_some(buf, sizeof(buf));
        if (n <= 0) break;
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

int fail(const char* what, const std::string& got) {
    std::fprintf(stderr, "FAIL %s\ngot:\n%.600s\n", what, got.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::fprintf(stderr, "usage: %s <profile-dir> <rules-file> <log-dir>\n",
                     argv[0]);
        return 2;
    }

    std::vector<std::string> errors;
    auto profile = CameraProfile::load(argv[1], errors);
    auto rules = SignatureSet::load_file(argv[2], errors);
    if (!profile || !rules) {
        for (const auto& e : errors) std::fprintf(stderr, "%s\n", e.c_str());
        return 2;
    }

    std::filesystem::create_directories(argv[3]);
    JsonlFileSink sink(argv[3]);
    SystemClock clock;
    Rng rng;
    ArtifactStore store(std::filesystem::path(argv[3]) / "artifacts");

    CameraConfig cfg;
    cfg.profile = &*profile;
    cfg.signatures = &*rules;
    cfg.honeypot_id = "e2e-camera";
    cfg.artifacts = &store;

    std::string err;
    TcpListener listener;
    if (!listener.open("127.0.0.1", 0, err)) {
        std::fprintf(stderr, "bind: %s\n", err.c_str());
        return 2;
    }
    int port = listener.bound_port();

    std::thread server([&] {
        for (int i = 0; i < 3; ++i) {
            auto conn = listener.accept();
            if (conn) run_camera_session(*conn, cfg, sink, clock, rng);
        }
    });

    int rc = 0;

    // challenge, then authenticated page
    {
        auto conn = tcp_connect("127.0.0.1", port, 3000, err);
        if (!conn) return 1;
        conn->write_all("GET / HTTP/1.1\r\nHost: cam\r\n\r\n");
        conn->write_all("GET / HTTP/1.1\r\nHost: cam\r\nAuthorization: Basic " +
                        base64_encode("admin:") + "\r\nConnection: close\r\n\r\n");
        std::string got = slurp(*conn);
        if (!contains(got, "401 Unauthorized") ||
            !contains(got, "WWW-Authenticate: Basic realm="))
            rc = fail("401 challenge", got);
        else if (!contains(got, "200 OK") || !contains(got, profile->model))
            rc = fail("authenticated status page", got);
    }

    // bounded mjpeg stream delivers whole jpegs
    if (rc == 0) {
        auto conn = tcp_connect("127.0.0.1", port, 3000, err);
        if (!conn) return 1;
        conn->write_all(
            "GET /?action=stream&count=4&user=admin&pwd= HTTP/1.1\r\n\r\n");
        std::string got = slurp(*conn);
        int parts = 0;
        for (std::size_t pos = 0;
             (pos = got.find("--" + profile->stream_boundary, pos)) !=
             std::string::npos;
             pos += 2)
            ++parts;
        if (!contains(got, "multipart/x-mixed-replace") || parts != 4)
            rc = fail("bounded stream", got);
    }

    // signature-bearing attack request
    if (rc == 0) {
        auto conn = tcp_connect("127.0.0.1", port, 3000, err);
        if (!conn) return 1;
        conn->write_all(
            "GET /device.rsp?opt=user&cmd=list HTTP/1.1\r\n"
            "Cookie: uid=admin\r\nConnection: close\r\n\r\n");
        std::string got = slurp(*conn);
        if (!contains(got, "404 Not Found")) rc = fail("attack 404", got);
    }

    server.join();
    sink.flush();

    int lines = 0, closes = 0, hits = 0;
    for (const auto& entry : std::filesystem::directory_iterator(argv[3])) {
        if (entry.path().extension() != ".jsonl") continue;
        std::ifstream in(entry.path());
        std::string line;
        while (std::getline(in, line)) {
            ++lines;
            auto outcome = parse_envelope(line);
            if (!std::holds_alternative<EventEnvelope>(outcome)) {
                std::fprintf(stderr, "unparseable log line: %s\n",
                             line.c_str());
                return 1;
            }
            const auto& env = std::get<EventEnvelope>(outcome);
            if (env.kind == EventKind::session_close) ++closes;
            if (env.kind == EventKind::signature_hit) ++hits;
        }
    }
    if (closes != 3 || hits != 1) {
        std::fprintf(stderr, "log incomplete: %d lines, %d closes, %d hits\n",
                     lines, closes, hits);
        return 1;
    }

    if (rc == 0) std::printf("e2e camera probe OK (%d log lines)\n", lines);
    return rc;
}
