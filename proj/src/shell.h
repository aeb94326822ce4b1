#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "artifact_store.h"
#include "clock.h"
#include "credential_policy.h"
#include "device_profile.h"
#include "event.h"
#include "fakefs.h"
#include "net.h"
#include "rng.h"
#include "sinks.h"

namespace apiary {

enum class DownloadMode { record_only, fetch };

struct ShellConfig {
    const DeviceProfile* profile = nullptr;
    const FakeFilesystem* fs = nullptr;
    CredentialPolicy policy = CredentialPolicy::make_accept_all();
    Protocol protocol = Protocol::telnet;  // telnet or ssh (banner-only)
    std::string honeypot_id = "shell";
    int max_login_failures = 3;
    DownloadMode download_mode = DownloadMode::record_only;
    std::int64_t max_artifact_bytes = 5 * 1024 * 1024;
    ArtifactStore* artifacts = nullptr;  // required for fetch mode
    int fetch_timeout_ms = 4000;
};

// One top-level command segment after splitting a raw line on ';'/'&&'.
struct ParsedCommand {
    std::string raw;  // trimmed original text of this segment
    std::vector<std::vector<std::string>> pipeline;  // argv per pipe stage
    std::string redirect_path;
    bool redirect_append = false;
};

// Splits on top-level ';' and '&&' (outside quotes); one entry per segment,
// including empty segments, so callers log exactly
// 1 + number-of-separators command events per line.
std::vector<ParsedCommand> parse_command_line(const std::string& line);

struct CommandOutput {
    std::string text;  // '\n' line endings; converted to CRLF at the wire
    int exit_status = 0;
};

// Login state machine + command interpreter for one connection. Network
// framing stays outside; tests drive this directly.
class ShellSession {
public:
    ShellSession(const ShellConfig& cfg, SessionEmitter& emitter, Clock& clock,
                 Rng& rng, std::int64_t boot_ms);

    // emits the AuthAttempt envelope and updates session state
    bool try_login(const std::string& username, const std::string& password);

    // executes one raw input line: every segment emits one CommandEvent;
    // returns concatenated terminal output
    std::string handle_line(const std::string& line);

    bool authenticated() const { return authenticated_; }
    bool wants_exit() const { return wants_exit_; }
    int consecutive_failures() const { return consecutive_failures_; }
    std::string prompt() const;
    const std::string& cwd() const { return cwd_; }
    const std::map<std::string, std::string>& env() const { return env_; }

    CommandOutput execute_segment(const ParsedCommand& cmd);

private:
    CommandOutput run_argv(const std::vector<std::string>& argv,
                           const std::string& raw);
    CommandOutput run_named(const std::string& name,
                            std::vector<std::string> args,
                            const std::string& raw);
    CommandOutput busybox_command(const std::vector<std::string>& args,
                                  const std::string& raw);
    CommandOutput download_command(const std::string& tool,
                                   const std::vector<std::string>& args);
    std::string expand_token(const std::string& token) const;

    const ShellConfig& cfg_;
    SessionEmitter& emitter_;
    Clock& clock_;
    Rng& rng_;
    FsOverlay overlay_;
    SessionFs fs_;
    std::string username_;
    std::string cwd_ = "/";
    std::map<std::string, std::string> env_;
    bool authenticated_ = false;
    bool wants_exit_ = false;
    int consecutive_failures_ = 0;
    int last_exit_ = 0;
    std::vector<std::string> history_;

    friend struct ShellCommandTable;
};

// Full connection driver: banner exchange (ssh mode), login dialogue,
// command loop, session_open/close envelopes. Exceptions never escape.
void run_shell_session(ByteStream& stream, const ShellConfig& cfg,
                       EventSink& sink, Clock& clock, Rng& rng,
                       std::int64_t boot_ms);

// Strips telnet IAC option negotiation from the inbound byte stream,
// answering every DO with WONT and every WILL with DONT.
class TelnetStream : public ByteStream {
public:
    explicit TelnetStream(ByteStream& inner) : inner_(inner) {}

    int read_some(char* buf, std::size_t len) override;
    bool write_all(std::string_view data) override {
        bool ok = inner_.write_all(data);
        bytes_written_ = inner_.bytes_written();
        return ok;
    }
    void close() override { inner_.close(); }
    std::string peer_addr() const override { return inner_.peer_addr(); }
    int peer_port() const override { return inner_.peer_port(); }

private:
    ByteStream& inner_;
    int state_ = 0;  // 0 data, 1 saw IAC, 2 awaiting option byte, 3 in SB
    char pending_verb_ = 0;
};

}  // namespace apiary
