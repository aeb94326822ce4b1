#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace apiary {

enum class Protocol { telnet, ssh, http };

enum class EventKind {
    session_open,
    auth_attempt,
    command,
    download,
    http_request,
    signature_hit,
    firmware_upload,
    session_close,
};

enum class AuthMechanism { shell_login, http_basic, url_credential };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);
std::string_view kind_name(EventKind k);
std::optional<EventKind> kind_from_name(std::string_view name);
std::string_view mechanism_name(AuthMechanism m);
std::optional<AuthMechanism> mechanism_from_name(std::string_view name);

// Per-connection context shared by every event of the session.
struct SessionRecord {
    std::string session_id;  // 32 lowercase hex chars, unique per corpus
    std::string honeypot_id;
    Protocol protocol = Protocol::telnet;
    std::string source_addr;
    int source_port = 0;
    std::int64_t start_time_ms = 0;
    std::optional<std::int64_t> end_time_ms;
    std::optional<std::string> client_banner;

    bool operator==(const SessionRecord&) const = default;
};

struct SessionOpen {
    std::string honeypot_id;
    Protocol protocol = Protocol::telnet;
    std::string source_addr;
    int source_port = 0;
    std::optional<std::string> client_banner;
    bool banner_truncated = false;

    bool operator==(const SessionOpen&) const = default;
};

struct AuthAttempt {
    std::string username;
    std::string password;
    bool success = false;
    AuthMechanism mechanism = AuthMechanism::shell_login;

    bool operator==(const AuthAttempt&) const = default;
};

struct CommandEvent {
    std::string raw_line;
    std::vector<std::string> argv;
    int exit_status = 0;
    std::int64_t output_bytes = 0;

    bool operator==(const CommandEvent&) const = default;
};

struct DownloadEvent {
    std::string url;
    std::string sha256;       // empty when nothing was fetched
    std::int64_t size_bytes = 0;
    std::string stored_path;  // relative to the artifact store, empty if none
    bool fetched = false;
    bool truncated = false;   // hit max_artifact_bytes

    bool operator==(const DownloadEvent&) const = default;
};

struct HttpEvent {
    std::string method;
    std::string path_and_query;
    std::vector<std::pair<std::string, std::string>> headers;  // wire order
    std::optional<std::string> body_sha256;
    int status = 0;
    std::vector<std::string> matched_signatures;

    bool operator==(const HttpEvent&) const = default;
};

struct SignatureHit {
    std::string label;
    std::string method;
    std::string path_and_query;

    bool operator==(const SignatureHit&) const = default;
};

struct FirmwareUpload {
    std::string sha256;
    std::int64_t size_bytes = 0;
    std::string stored_path;
    bool truncated = false;

    bool operator==(const FirmwareUpload&) const = default;
};

struct SessionClose {
    std::int64_t bytes_served = 0;

    bool operator==(const SessionClose&) const = default;
};

// Alternative order matches EventKind so kind/payload agreement is checkable.
using EventPayload =
    std::variant<SessionOpen, AuthAttempt, CommandEvent, DownloadEvent,
                 HttpEvent, SignatureHit, FirmwareUpload, SessionClose>;

EventKind payload_kind(const EventPayload& p);

struct EventEnvelope {
    std::string session_id;
    std::uint64_t seq = 0;
    std::int64_t timestamp_ms = 0;
    EventKind kind = EventKind::session_open;
    EventPayload payload;

    bool operator==(const EventEnvelope&) const = default;
};

// One JSON object per line, key order (session_id, seq, timestamp, kind,
// payload), RFC 3339 millisecond timestamps, no raw newline anywhere.
// Throws std::invalid_argument if kind does not match the payload.
std::string serialize_envelope(const EventEnvelope& env);

struct EnvelopeParseError {
    bool unknown_kind = false;
    std::size_t byte_offset = 0;
    std::string message;
};

using ParseOutcome = std::variant<EventEnvelope, EnvelopeParseError>;

ParseOutcome parse_envelope(std::string_view line);

}  // namespace apiary
