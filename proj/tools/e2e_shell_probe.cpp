// Ad-hoc end-to-end probe: serves the BusyBox shell honeypot on an
// ephemeral TCP port, connects to it as a client, walks through login and
// a command, and checks both the dialogue and the emitted .jsonl log.
// Exit 0 on success; prints the failing step otherwise.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "clock.h"
#include "credential_policy.h"
#include "device_profile.h"
#include "event.h"
#include "fakefs.h"
#include "net.h"
#include "rng.h"
#include "shell.h"
#include "sinks.h"
#include "util.h"

using namespace apiary;

namespace {

bool expect(ByteStream& conn, const std::string& needle, std::string& seen) {
    char buf[2048];
    for (int tries = 0; tries < 50; ++tries) {
        if (seen.find(needle) != std::string::npos) return true;
        int n = conn.read_some(buf, sizeof(buf));
        if (n <= 0) break;
        seen.append(buf, static_cast<std::size_t>(n));
    }
    return seen.find(needle) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <profile-dir> <log-dir>\n", argv[0]);
        return 2;
    }

    std::vector<std::string> errors;
    auto profile = DeviceProfile::load(argv[1], errors);
    if (!profile) {
        for (const auto& e : errors) std::fprintf(stderr, "%s\n", e.c_str());
        return 2;
    }
    auto fs = FakeFilesystem::build(*profile, errors);
    if (!fs) return 2;

    std::filesystem::create_directories(argv[2]);
    JsonlFileSink sink(argv[2]);
    SystemClock clock;
    Rng rng;

    ShellConfig cfg;
    cfg.profile = &*profile;
    cfg.fs = &*fs;
    cfg.policy = CredentialPolicy::make_accept_all();
    cfg.honeypot_id = "e2e-shell";

    std::string err;
    TcpListener listener;
    if (!listener.open("127.0.0.1", 0, err)) {
        std::fprintf(stderr, "bind: %s\n", err.c_str());
        return 2;
    }
    int port = listener.bound_port();

    std::thread server([&] {
        auto conn = listener.accept();
        if (conn) run_shell_session(*conn, cfg, sink, clock, rng,
                                    clock.now_ms() - 3'600'000);
    });

    int rc = 0;
    {
        auto conn = tcp_connect("127.0.0.1", port, 3000, err);
        if (!conn) {
            std::fprintf(stderr, "connect: %s\n", err.c_str());
            rc = 1;
        } else {
            std::string seen;
            auto step = [&](const char* what, bool ok) {
                if (!ok && rc == 0) {
                    std::fprintf(stderr, "FAIL %s\nseen so far:\n%s\n", what,
                                 seen.c_str());
                    rc = 1;
                }
            };
            step("login prompt", expect(*conn, "login: ", seen));
            conn->write_all("root\r\n");
            step("password prompt", expect(*conn, "Password: ", seen));
            conn->write_all("hunter2\r\n");
            step("motd", expect(*conn, "built-in shell (ash)", seen));
            step("root prompt", expect(*conn, "# ", seen));
            conn->write_all("uname -a\r\n");
            step("uname output", expect(*conn, "GNU/Linux", seen));
            conn->write_all("busybox GOBLIN\r\n");
            step("applet not found",
                 expect(*conn, "GOBLIN: applet not found", seen));
            conn->write_all("exit\r\n");
            conn->close();
        }
    }
    server.join();
    sink.flush();

    // the emitted log must parse line by line and close the session
    bool saw_close = false;
    int lines = 0;
    for (const auto& entry :
         std::filesystem::directory_iterator(argv[2])) {
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
            if (std::get<EventEnvelope>(outcome).kind ==
                EventKind::session_close)
                saw_close = true;
        }
    }
    if (lines < 4 || !saw_close) {
        std::fprintf(stderr, "log incomplete: %d lines, close=%d\n", lines,
                     saw_close);
        return 1;
    }

    if (rc == 0) std::printf("e2e shell probe OK (%d log lines)\n", lines);
    return rc;
}
