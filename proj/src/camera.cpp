#include "camera.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httpmsg.h"
#include "util.h"

namespace apiary {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

const PageSpec* CameraProfile::find_page(const std::string& path) const {
    for (const auto& p : pages)
        if (p.path == path) return &p;
    return nullptr;
}

std::optional<CameraProfile> CameraProfile::load(
    const std::string& dir, std::vector<std::string>& errors) {
    CameraProfile out;
    out.dir = dir;

    auto conf_path = std::filesystem::path(dir) / "camera.conf";
    auto conf = read_file(conf_path);
    if (!conf) {
        errors.push_back("cannot open " + conf_path.string());
        return std::nullopt;
    }

    std::map<std::string, std::string> kv;
    std::string frames_dir = "frames";
    std::istringstream in(*conf);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back(conf_path.string() + ":" +
                             std::to_string(lineno) + ": expected key=value");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "page") {
            // page=<path> <handler> <auth|noauth> <template>
            auto parts = split(value, ' ');
            parts.erase(std::remove(parts.begin(), parts.end(), std::string()),
                        parts.end());
            if (parts.size() != 4 ||
                (parts[2] != "auth" && parts[2] != "noauth")) {
                errors.push_back(conf_path.string() + ":" +
                                 std::to_string(lineno) + ": bad page line");
                continue;
            }
            PageSpec page;
            page.path = parts[0];
            page.handler = parts[1];
            page.auth_required = parts[2] == "auth";
            page.template_asset = parts[3];
            out.pages.push_back(std::move(page));
        } else {
            kv[key] = value;
        }
    }

    auto need = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) {
            errors.push_back(conf_path.string() + ": missing key '" +
                             std::string(key) + "'");
            return {};
        }
        return it->second;
    };

    out.model = need("model");
    out.realm = need("realm");
    out.server_header = need("server_header");
    out.firmware_version = need("firmware_version");
    out.admin_username = need("admin_username");
    if (kv.count("admin_password")) out.admin_password = kv["admin_password"];
    out.mac = need("mac");
    out.lan_ip = need("lan_ip");
    out.gateway = need("gateway");
    out.netmask = need("netmask");
    out.stream_boundary = need("stream_boundary");
    if (kv.count("listen_port")) out.listen_port = std::atoi(kv["listen_port"].c_str());
    if (kv.count("frame_interval_ms"))
        out.frame_interval_ms = std::atoi(kv["frame_interval_ms"].c_str());
    if (kv.count("frames")) frames_dir = kv["frames"];
    if (out.listen_port <= 0 || out.listen_port > 65535)
        errors.push_back(conf_path.string() + ": listen_port out of range");
    if (out.frame_interval_ms <= 0)
        errors.push_back(conf_path.string() + ": frame_interval_ms must be positive");

    auto asset = [&](const char* key, std::string* slot) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            errors.push_back(conf_path.string() + ": missing key '" +
                             std::string(key) + "'");
            return;
        }
        auto content = read_file(std::filesystem::path(dir) / it->second);
        if (!content) {
            errors.push_back("cannot open asset " + it->second);
            return;
        }
        *slot = *content;
    };
    asset("error_400", &out.page_400);
    asset("error_401", &out.page_401);
    asset("error_404", &out.page_404);
    asset("success_page", &out.success_page);
    asset("upgrading_page", &out.upgrading_page);

    // page templates are loaded in place of the asset name
    for (auto& page : out.pages) {
        auto content =
            read_file(std::filesystem::path(dir) / page.template_asset);
        if (!content) {
            errors.push_back("cannot open page template " +
                             page.template_asset);
            continue;
        }
        page.template_asset = *content;
    }
    if (out.pages.size() != 6)
        errors.push_back(conf_path.string() + ": expected exactly 6 pages, got " +
                         std::to_string(out.pages.size()));

    std::filesystem::path fdir = std::filesystem::path(dir) / frames_dir;
    std::vector<std::filesystem::path> frame_files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(fdir, ec))
        if (entry.path().extension() == ".jpg")
            frame_files.push_back(entry.path());
    if (ec) errors.push_back("cannot list frames dir " + fdir.string());
    std::sort(frame_files.begin(), frame_files.end());
    for (const auto& f : frame_files) {
        auto content = read_file(f);
        if (content) out.frames.push_back(std::move(*content));
    }
    if (out.frames.empty())
        errors.push_back("profile has no .jpg frames in " + fdir.string());

    if (!errors.empty()) return std::nullopt;
    return out;
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto open = text.find("{{", pos);
        if (open == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        auto close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        out += text.substr(pos, open - pos);
        std::string name = trim(text.substr(open + 2, close - open - 2));
        auto it = vars.find(name);
        if (it != vars.end())
            out += it->second;
        else
            out += text.substr(open, close - open + 2);
        pos = close + 2;
    }
    return out;
}

namespace {

struct RequestContext {
    const CameraConfig& cfg;
    SessionEmitter& emitter;
    Clock& clock;
    ByteStream& stream;
};

// credentials offered by this request, if any
struct OfferedCreds {
    std::string username;
    std::string password;
    AuthMechanism mechanism = AuthMechanism::http_basic;
    bool decode_failed = false;
};

std::optional<OfferedCreds> extract_credentials(const HttpRequest& req) {
    if (auto auth = req.header("Authorization")) {
        OfferedCreds c;
        c.mechanism = AuthMechanism::http_basic;
        std::string value = trim(*auth);
        if (starts_with(value, "Basic ") || starts_with(value, "basic ")) {
            auto decoded = base64_decode(trim(value.substr(6)));
            if (decoded) {
                auto colon = decoded->find(':');
                if (colon == std::string::npos) {
                    c.username = *decoded;
                } else {
                    c.username = decoded->substr(0, colon);
                    c.password = decoded->substr(colon + 1);
                }
                return c;
            }
        }
        // scheme junk or broken base64: log the raw value as the username
        c.username = value;
        c.decode_failed = true;
        return c;
    }
    std::string query = req.query();
    auto user = query_param(query, "user");
    auto pwd = query_param(query, "pwd");
    if (user || pwd) {
        OfferedCreds c;
        c.mechanism = AuthMechanism::url_credential;
        c.username = user.value_or("");
        c.password = pwd.value_or("");
        return c;
    }
    return std::nullopt;
}

HttpResponse base_response(const RequestContext& ctx, int status,
                           std::string body,
                           const std::string& content_type = "text/html") {
    HttpResponse resp;
    resp.status = status;
    resp.headers.emplace_back("Server", ctx.cfg.profile->server_header);
    resp.headers.emplace_back("Date", http_date(ctx.clock.now_ms()));
    resp.headers.emplace_back("Content-Type", content_type);
    resp.body = std::move(body);
    return resp;
}

std::map<std::string, std::string> template_vars(const RequestContext& ctx) {
    const CameraProfile& p = *ctx.cfg.profile;
    return {
        {"model", p.model},
        {"firmware", p.firmware_version},
        {"realm", p.realm},
        {"mac", p.mac},
        {"ip", p.lan_ip},
        {"gateway", p.gateway},
        {"netmask", p.netmask},
        {"time", http_date(ctx.clock.now_ms())},
        {"port", std::to_string(p.listen_port)},
    };
}

// writes the looping multipart stream; returns bytes of frames pushed.
// part_limit > 0 stops after that many parts (count= query parameter,
// as mjpg-streamer-style firmwares accept); otherwise runs until the
// client goes away.
void serve_stream(const RequestContext& ctx, long part_limit) {
    const CameraProfile& p = *ctx.cfg.profile;
    HttpResponse head;
    head.status = 200;
    head.suppress_length = true;
    head.headers.emplace_back("Server", p.server_header);
    head.headers.emplace_back("Date", http_date(ctx.clock.now_ms()));
    head.headers.emplace_back(
        "Content-Type",
        "multipart/x-mixed-replace; boundary=" + p.stream_boundary);
    head.headers.emplace_back("Connection", "close");
    head.headers.emplace_back("Cache-Control", "no-cache");
    if (!ctx.stream.write_all(render_http_response_head(head))) return;

    for (long i = 0; part_limit <= 0 || i < part_limit; ++i) {
        const std::string& frame =
            p.frames[static_cast<std::size_t>(i) % p.frames.size()];
        std::string part = "--" + p.stream_boundary +
                           "\r\nContent-Type: image/jpeg\r\nContent-Length: " +
                           std::to_string(frame.size()) + "\r\n\r\n";
        if (!ctx.stream.write_all(part)) return;
        if (!ctx.stream.write_all(frame)) return;
        if (!ctx.stream.write_all("\r\n")) return;
        if (part_limit > 0 && i + 1 == part_limit) break;
        ctx.clock.sleep_ms(p.frame_interval_ms);
    }
}

}  // namespace

void run_camera_session(ByteStream& stream, const CameraConfig& cfg,
                        EventSink& sink, Clock& clock, Rng& rng) {
    const CameraProfile& profile = *cfg.profile;
    SessionEmitter emitter(rng.session_id(), cfg.honeypot_id, clock, sink);

    SessionOpen open;
    open.honeypot_id = cfg.honeypot_id;
    open.protocol = Protocol::http;
    open.source_addr = stream.peer_addr();
    open.source_port = stream.peer_port();
    emitter.emit(open);

    try {
        LineReader reader(stream, 8192);
        RequestContext ctx{cfg, emitter, clock, stream};

        for (int served = 0; served < cfg.max_requests_per_connection;
             ++served) {
            auto parsed = read_http_request(reader, cfg.max_body_bytes);
            if (parsed.status == HttpParseStatus::closed) break;

            HttpEvent ev;
            bool keep_alive = false;

            if (parsed.status == HttpParseStatus::malformed) {
                std::string raw = parsed.raw_prefix;
                if (raw.size() > 256) raw.resize(256);
                ev.method = "";
                ev.path_and_query = sanitize_capture(raw);
                ev.status = 400;
                auto resp = base_response(ctx, 400, profile.page_400);
                resp.headers.emplace_back("Connection", "close");
                write_http_response(stream, resp);
                emitter.emit(ev);
                break;
            }

            const HttpRequest& req = parsed.request;
            ev.method = sanitize_capture(req.method);
            ev.path_and_query = sanitize_capture(req.target);
            for (const auto& [k, v] : req.headers)
                ev.headers.emplace_back(sanitize_capture(k),
                                        sanitize_capture(v));
            if (!req.body.empty()) ev.body_sha256 = sha256_hex(req.body);

            if (cfg.signatures) {
                ev.matched_signatures = cfg.signatures->match(
                    req.method, req.target, req.headers, req.body);
                for (const auto& label : ev.matched_signatures) {
                    SignatureHit hit;
                    hit.label = label;
                    hit.method = ev.method;
                    hit.path_and_query = ev.path_and_query;
                    emitter.emit(hit);
                }
            }

            if (parsed.status == HttpParseStatus::body_too_large) {
                ev.status = 413;
                auto resp = base_response(ctx, 413, profile.page_400);
                resp.headers.emplace_back("Connection", "close");
                write_http_response(stream, resp);
                emitter.emit(ev);
                break;
            }

            // routing
            std::string path = req.path();
            std::string query = req.query();
            const PageSpec* page = profile.find_page(path);
            bool is_snapshot = path == "/snapshot.cgi";
            HttpResponse resp;
            bool streamed = false;

            keep_alive = req.version == "HTTP/1.1";
            if (auto conn = req.header("Connection")) {
                if (iequals(*conn, "close")) keep_alive = false;
                if (iequals(*conn, "keep-alive")) keep_alive = true;
            }

            if (!page && !is_snapshot) {
                resp = base_response(ctx, 404, render_template(
                                                   profile.page_404,
                                                   template_vars(ctx)));
            } else if (req.method != "GET" && req.method != "POST") {
                resp = base_response(ctx, 405, "");
                resp.headers.emplace_back("Allow", "GET, POST");
            } else if (req.method == "POST" && page &&
                       page->handler != "password_change" &&
                       page->handler != "user_create" &&
                       page->handler != "firmware_upload") {
                resp = base_response(ctx, 405, "");
                resp.headers.emplace_back("Allow", "GET");
            } else {
                // authentication
                bool authed = false;
                bool auth_needed = is_snapshot || page->auth_required;
                if (auth_needed) {
                    auto creds = extract_credentials(req);
                    if (creds) {
                        AuthAttempt attempt;
                        attempt.username = sanitize_capture(creds->username);
                        attempt.password = sanitize_capture(creds->password);
                        attempt.mechanism = creds->mechanism;
                        attempt.success =
                            !creds->decode_failed &&
                            creds->username == profile.admin_username &&
                            creds->password == profile.admin_password;
                        emitter.emit(attempt);
                        authed = attempt.success;
                    }
                } else {
                    authed = true;
                }

                if (!authed) {
                    resp = base_response(ctx, 401, render_template(
                                                       profile.page_401,
                                                       template_vars(ctx)));
                    resp.headers.emplace_back(
                        "WWW-Authenticate",
                        "Basic realm=\"" + profile.realm + "\"");
                } else if (is_snapshot) {
                    resp = base_response(ctx, 200, profile.frames.front(),
                                         "image/jpeg");
                } else if (page->handler == "device_status" &&
                           query_param(query, "action").value_or("") ==
                               "stream") {
                    long limit = 0;
                    if (auto count = query_param(query, "count"))
                        limit = std::atol(count->c_str());
                    serve_stream(ctx, limit);
                    streamed = true;
                    ev.status = 200;
                } else if (page->handler == "firmware_upload" &&
                           req.method == "POST") {
                    FirmwareUpload up;
                    std::string blob = req.body;
                    if (static_cast<std::int64_t>(blob.size()) >
                        cfg.max_artifact_bytes) {
                        blob.resize(
                            static_cast<std::size_t>(cfg.max_artifact_bytes));
                        up.truncated = true;
                    }
                    if (cfg.artifacts) {
                        auto stored = cfg.artifacts->put(blob);
                        up.sha256 = stored.sha256;
                        up.size_bytes = stored.size_bytes;
                        up.stored_path = stored.relative_path;
                    } else {
                        up.sha256 = sha256_hex(blob);
                        up.size_bytes = static_cast<std::int64_t>(blob.size());
                    }
                    emitter.emit(up);
                    resp = base_response(
                        ctx, 200,
                        render_template(profile.upgrading_page,
                                        template_vars(ctx)));
                } else if (req.method == "POST") {
                    // password_change / user_create act like the real form
                    // handler: acknowledge, change nothing
                    resp = base_response(
                        ctx, 200,
                        render_template(profile.success_page,
                                        template_vars(ctx)));
                } else {
                    resp = base_response(
                        ctx, 200,
                        render_template(page->template_asset,
                                        template_vars(ctx)));
                }
            }

            if (streamed) {
                emitter.emit(ev);
                break;  // stream responses end the connection
            }

            resp.headers.emplace_back("Connection",
                                      keep_alive ? "keep-alive" : "close");
            bool wrote = write_http_response(stream, resp);
            ev.status = resp.status;
            emitter.emit(ev);
            if (!wrote || !keep_alive) break;
        }
    } catch (...) {
        // hostile input must never take the listener down
    }

    SessionClose close_payload;
    close_payload.bytes_served = stream.bytes_written();
    emitter.emit(close_payload);
    stream.close();
}

}  // namespace apiary
