#include "event.h"

#include <json.hpp>

#include <stdexcept>

#include "clock.h"

namespace apiary {

using ojson = nlohmann::ordered_json;
using njson = nlohmann::json;

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::telnet: return "telnet";
        case Protocol::ssh: return "ssh";
        case Protocol::http: return "http";
    }
    return "telnet";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
    if (name == "telnet") return Protocol::telnet;
    if (name == "ssh") return Protocol::ssh;
    if (name == "http") return Protocol::http;
    return std::nullopt;
}

namespace {
constexpr const char* kKindNames[] = {
    "session_open", "auth_attempt",  "command",         "download",
    "http_request", "signature_hit", "firmware_upload", "session_close",
};
}

std::string_view kind_name(EventKind k) {
    return kKindNames[static_cast<int>(k)];
}

std::optional<EventKind> kind_from_name(std::string_view name) {
    for (int i = 0; i < 8; ++i)
        if (name == kKindNames[i]) return static_cast<EventKind>(i);
    return std::nullopt;
}

std::string_view mechanism_name(AuthMechanism m) {
    switch (m) {
        case AuthMechanism::shell_login: return "shell_login";
        case AuthMechanism::http_basic: return "http_basic";
        case AuthMechanism::url_credential: return "url_credential";
    }
    return "shell_login";
}

std::optional<AuthMechanism> mechanism_from_name(std::string_view name) {
    if (name == "shell_login") return AuthMechanism::shell_login;
    if (name == "http_basic") return AuthMechanism::http_basic;
    if (name == "url_credential") return AuthMechanism::url_credential;
    return std::nullopt;
}

EventKind payload_kind(const EventPayload& p) {
    return static_cast<EventKind>(p.index());
}

namespace {

ojson payload_to_json(const EventPayload& payload) {
    ojson j = ojson::object();
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SessionOpen>) {
                j["honeypot_id"] = p.honeypot_id;
                j["protocol"] = protocol_name(p.protocol);
                j["source_addr"] = p.source_addr;
                j["source_port"] = p.source_port;
                if (p.client_banner) j["client_banner"] = *p.client_banner;
                if (p.banner_truncated) j["banner_truncated"] = true;
            } else if constexpr (std::is_same_v<T, AuthAttempt>) {
                j["username"] = p.username;
                j["password"] = p.password;
                j["success"] = p.success;
                j["mechanism"] = mechanism_name(p.mechanism);
            } else if constexpr (std::is_same_v<T, CommandEvent>) {
                j["raw_line"] = p.raw_line;
                j["argv"] = p.argv;
                j["exit_status"] = p.exit_status;
                j["output_bytes"] = p.output_bytes;
            } else if constexpr (std::is_same_v<T, DownloadEvent>) {
                j["url"] = p.url;
                j["sha256"] = p.sha256;
                j["size_bytes"] = p.size_bytes;
                j["stored_path"] = p.stored_path;
                j["fetched"] = p.fetched;
                if (p.truncated) j["truncated"] = true;
            } else if constexpr (std::is_same_v<T, HttpEvent>) {
                j["method"] = p.method;
                j["path_and_query"] = p.path_and_query;
                ojson hdrs = ojson::array();
                for (const auto& [name, value] : p.headers)
                    hdrs.push_back(ojson::array({name, value}));
                j["headers"] = std::move(hdrs);
                if (p.body_sha256) j["body_sha256"] = *p.body_sha256;
                j["status"] = p.status;
                j["matched_signatures"] = p.matched_signatures;
            } else if constexpr (std::is_same_v<T, SignatureHit>) {
                j["label"] = p.label;
                j["method"] = p.method;
                j["path_and_query"] = p.path_and_query;
            } else if constexpr (std::is_same_v<T, FirmwareUpload>) {
                j["sha256"] = p.sha256;
                j["size_bytes"] = p.size_bytes;
                j["stored_path"] = p.stored_path;
                if (p.truncated) j["truncated"] = true;
            } else if constexpr (std::is_same_v<T, SessionClose>) {
                j["bytes_served"] = p.bytes_served;
            }
        },
        payload);
    return j;
}

// Field extraction helpers: wrong/missing types surface as parse errors, not
// exceptions, so hostile or future log lines can never take ingestion down.
struct FieldError {
    std::string message;
};

const njson* get_field(const njson& j, const char* key, FieldError& err) {
    auto it = j.find(key);
    if (it == j.end()) {
        err.message = std::string("missing field '") + key + "'";
        return nullptr;
    }
    return &*it;
}

bool read_string(const njson& j, const char* key, std::string& out,
                 FieldError& err) {
    const njson* f = get_field(j, key, err);
    if (!f) return false;
    if (!f->is_string()) {
        err.message = std::string("field '") + key + "' is not a string";
        return false;
    }
    out = f->get<std::string>();
    return true;
}

bool read_int(const njson& j, const char* key, std::int64_t& out,
              FieldError& err) {
    const njson* f = get_field(j, key, err);
    if (!f) return false;
    if (!f->is_number_integer()) {
        err.message = std::string("field '") + key + "' is not an integer";
        return false;
    }
    out = f->get<std::int64_t>();
    return true;
}

bool read_bool(const njson& j, const char* key, bool& out, FieldError& err) {
    const njson* f = get_field(j, key, err);
    if (!f) return false;
    if (!f->is_boolean()) {
        err.message = std::string("field '") + key + "' is not a boolean";
        return false;
    }
    out = f->get<bool>();
    return true;
}

bool payload_from_json(EventKind kind, const njson& j, EventPayload& out,
                       FieldError& err) {
    if (!j.is_object()) {
        err.message = "payload is not an object";
        return false;
    }
    switch (kind) {
        case EventKind::session_open: {
            SessionOpen p;
            std::string proto;
            std::int64_t port = 0;
            if (!read_string(j, "honeypot_id", p.honeypot_id, err)) return false;
            if (!read_string(j, "protocol", proto, err)) return false;
            auto pr = protocol_from_name(proto);
            if (!pr) {
                err.message = "unknown protocol '" + proto + "'";
                return false;
            }
            p.protocol = *pr;
            if (!read_string(j, "source_addr", p.source_addr, err)) return false;
            if (!read_int(j, "source_port", port, err)) return false;
            p.source_port = static_cast<int>(port);
            if (j.contains("client_banner")) {
                std::string b;
                if (!read_string(j, "client_banner", b, err)) return false;
                p.client_banner = b;
            }
            if (j.contains("banner_truncated") &&
                !read_bool(j, "banner_truncated", p.banner_truncated, err))
                return false;
            out = std::move(p);
            return true;
        }
        case EventKind::auth_attempt: {
            AuthAttempt p;
            std::string mech;
            if (!read_string(j, "username", p.username, err)) return false;
            if (!read_string(j, "password", p.password, err)) return false;
            if (!read_bool(j, "success", p.success, err)) return false;
            if (!read_string(j, "mechanism", mech, err)) return false;
            auto m = mechanism_from_name(mech);
            if (!m) {
                err.message = "unknown mechanism '" + mech + "'";
                return false;
            }
            p.mechanism = *m;
            out = std::move(p);
            return true;
        }
        case EventKind::command: {
            CommandEvent p;
            std::int64_t status = 0;
            if (!read_string(j, "raw_line", p.raw_line, err)) return false;
            const njson* argv = get_field(j, "argv", err);
            if (!argv) return false;
            if (!argv->is_array()) {
                err.message = "field 'argv' is not an array";
                return false;
            }
            for (const auto& a : *argv) {
                if (!a.is_string()) {
                    err.message = "argv element is not a string";
                    return false;
                }
                p.argv.push_back(a.get<std::string>());
            }
            if (!read_int(j, "exit_status", status, err)) return false;
            p.exit_status = static_cast<int>(status);
            if (!read_int(j, "output_bytes", p.output_bytes, err)) return false;
            out = std::move(p);
            return true;
        }
        case EventKind::download: {
            DownloadEvent p;
            if (!read_string(j, "url", p.url, err)) return false;
            if (!read_string(j, "sha256", p.sha256, err)) return false;
            if (!read_int(j, "size_bytes", p.size_bytes, err)) return false;
            if (!read_string(j, "stored_path", p.stored_path, err)) return false;
            if (!read_bool(j, "fetched", p.fetched, err)) return false;
            if (j.contains("truncated") &&
                !read_bool(j, "truncated", p.truncated, err))
                return false;
            out = std::move(p);
            return true;
        }
        case EventKind::http_request: {
            HttpEvent p;
            std::int64_t status = 0;
            if (!read_string(j, "method", p.method, err)) return false;
            if (!read_string(j, "path_and_query", p.path_and_query, err))
                return false;
            const njson* hdrs = get_field(j, "headers", err);
            if (!hdrs) return false;
            if (!hdrs->is_array()) {
                err.message = "field 'headers' is not an array";
                return false;
            }
            for (const auto& h : *hdrs) {
                if (!h.is_array() || h.size() != 2 || !h[0].is_string() ||
                    !h[1].is_string()) {
                    err.message = "header entry is not a [name, value] pair";
                    return false;
                }
                p.headers.emplace_back(h[0].get<std::string>(),
                                       h[1].get<std::string>());
            }
            if (j.contains("body_sha256")) {
                std::string b;
                if (!read_string(j, "body_sha256", b, err)) return false;
                p.body_sha256 = b;
            }
            if (!read_int(j, "status", status, err)) return false;
            p.status = static_cast<int>(status);
            const njson* sigs = get_field(j, "matched_signatures", err);
            if (!sigs) return false;
            if (!sigs->is_array()) {
                err.message = "field 'matched_signatures' is not an array";
                return false;
            }
            for (const auto& s : *sigs) {
                if (!s.is_string()) {
                    err.message = "matched_signatures element is not a string";
                    return false;
                }
                p.matched_signatures.push_back(s.get<std::string>());
            }
            out = std::move(p);
            return true;
        }
        case EventKind::signature_hit: {
            SignatureHit p;
            if (!read_string(j, "label", p.label, err)) return false;
            if (!read_string(j, "method", p.method, err)) return false;
            if (!read_string(j, "path_and_query", p.path_and_query, err))
                return false;
            out = std::move(p);
            return true;
        }
        case EventKind::firmware_upload: {
            FirmwareUpload p;
            if (!read_string(j, "sha256", p.sha256, err)) return false;
            if (!read_int(j, "size_bytes", p.size_bytes, err)) return false;
            if (!read_string(j, "stored_path", p.stored_path, err)) return false;
            if (j.contains("truncated") &&
                !read_bool(j, "truncated", p.truncated, err))
                return false;
            out = std::move(p);
            return true;
        }
        case EventKind::session_close: {
            SessionClose p;
            if (!read_int(j, "bytes_served", p.bytes_served, err)) return false;
            out = std::move(p);
            return true;
        }
    }
    err.message = "unhandled kind";
    return false;
}

}  // namespace

std::string serialize_envelope(const EventEnvelope& env) {
    if (payload_kind(env.payload) != env.kind)
        throw std::invalid_argument(
            "envelope kind does not match payload type");
    ojson j;
    j["session_id"] = env.session_id;
    j["seq"] = env.seq;
    j["timestamp"] = format_rfc3339_ms(env.timestamp_ms);
    j["kind"] = kind_name(env.kind);
    j["payload"] = payload_to_json(env.payload);
    // replace: a non-UTF8 byte that slipped past capture sanitizing must
    // never kill the log sink
    return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

ParseOutcome parse_envelope(std::string_view line) {
    if (line.empty())
        return EnvelopeParseError{false, 0, "empty line"};
    njson j = njson::parse(line, nullptr, false);
    if (j.is_discarded()) {
        // re-parse with exceptions to recover the byte offset
        try {
            njson::parse(line);
        } catch (const njson::parse_error& e) {
            return EnvelopeParseError{false, e.byte, e.what()};
        }
        return EnvelopeParseError{false, 0, "malformed JSON"};
    }
    if (!j.is_object())
        return EnvelopeParseError{false, 0, "line is not a JSON object"};

    FieldError err;
    EventEnvelope env;
    if (!read_string(j, "session_id", env.session_id, err))
        return EnvelopeParseError{false, 0, err.message};
    std::int64_t seq = 0;
    if (!read_int(j, "seq", seq, err))
        return EnvelopeParseError{false, 0, err.message};
    if (seq < 0) return EnvelopeParseError{false, 0, "negative seq"};
    env.seq = static_cast<std::uint64_t>(seq);
    std::string ts;
    if (!read_string(j, "timestamp", ts, err))
        return EnvelopeParseError{false, 0, err.message};
    auto ms = parse_rfc3339_ms(ts);
    if (!ms)
        return EnvelopeParseError{false, 0, "bad timestamp '" + ts + "'"};
    env.timestamp_ms = *ms;
    std::string kind;
    if (!read_string(j, "kind", kind, err))
        return EnvelopeParseError{false, 0, err.message};
    auto k = kind_from_name(kind);
    if (!k)
        return EnvelopeParseError{true, 0, "unknown kind '" + kind + "'"};
    env.kind = *k;
    auto pit = j.find("payload");
    if (pit == j.end())
        return EnvelopeParseError{false, 0, "missing field 'payload'"};
    if (!payload_from_json(*k, *pit, env.payload, err))
        return EnvelopeParseError{false, 0, err.message};
    return env;
}

}  // namespace apiary
