#include "shell.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <sstream>

#include "util.h"

namespace apiary {

namespace {

// telnet NVT: every LF on the wire is CRLF
std::string to_wire(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 16);
    char prev = 0;
    for (char c : text) {
        if (c == '\n' && prev != '\r') out.push_back('\r');
        out.push_back(c);
        prev = c;
    }
    return out;
}

bool is_sep_ws(char c) { return c == ' ' || c == '\t'; }

struct Token {
    std::string text;
    bool quoted = false;  // any part was quoted: never a separator/operator
};

// whitespace-splitting honoring '...' and "..." plus backslash escapes;
// unquoted |, > and >> form their own tokens even without spacing
std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> tokens;
    std::string cur;
    bool in_token = false, quoted = false;
    auto flush = [&] {
        if (in_token) {
            tokens.push_back({cur, quoted});
            cur.clear();
            in_token = false;
            quoted = false;
        }
    };
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '|') {
            flush();
            tokens.push_back({"|", false});
            ++i;
            continue;
        }
        if (c == '>') {
            if (in_token && (cur == "2" || cur == "1")) {
                // standalone fd digit: swallow 2>&1 / 2>/dev/null whole
                cur.push_back('>');
                ++i;
                while (i < line.size() && !is_sep_ws(line[i]) &&
                       line[i] != '|')
                    cur.push_back(line[i++]);
                flush();
                continue;
            }
            flush();
            if (i + 1 < line.size() && line[i + 1] == '>') {
                tokens.push_back({">>", false});
                i += 2;
            } else {
                tokens.push_back({">", false});
                ++i;
            }
            continue;
        }
        if (c == '\'') {
            in_token = true;
            quoted = true;
            ++i;
            while (i < line.size() && line[i] != '\'') cur.push_back(line[i++]);
            if (i < line.size()) ++i;
        } else if (c == '"') {
            in_token = true;
            quoted = true;
            ++i;
            while (i < line.size() && line[i] != '"') {
                if (line[i] == '\\' && i + 1 < line.size() &&
                    (line[i + 1] == '"' || line[i + 1] == '\\')) {
                    cur.push_back(line[i + 1]);
                    i += 2;
                } else {
                    cur.push_back(line[i++]);
                }
            }
            if (i < line.size()) ++i;
        } else if (c == '\\' && i + 1 < line.size()) {
            in_token = true;
            cur.push_back(line[i + 1]);
            i += 2;
        } else if (is_sep_ws(c)) {
            flush();
            ++i;
        } else {
            in_token = true;
            cur.push_back(c);
            ++i;
        }
    }
    flush();
    return tokens;
}

// splits a raw line into top-level segments on ';' and '&&' outside quotes;
// returns the segment substrings, preserving empties
std::vector<std::string> split_segments(const std::string& line) {
    std::vector<std::string> segs;
    std::string cur;
    std::size_t i = 0;
    bool in_single = false, in_double = false;
    while (i < line.size()) {
        char c = line[i];
        if (in_single) {
            if (c == '\'') in_single = false;
            cur.push_back(c);
            ++i;
        } else if (in_double) {
            if (c == '\\' && i + 1 < line.size()) {
                cur += line.substr(i, 2);
                i += 2;
                continue;
            }
            if (c == '"') in_double = false;
            cur.push_back(c);
            ++i;
        } else if (c == '\'') {
            in_single = true;
            cur.push_back(c);
            ++i;
        } else if (c == '"') {
            in_double = true;
            cur.push_back(c);
            ++i;
        } else if (c == '\\' && i + 1 < line.size()) {
            cur += line.substr(i, 2);
            i += 2;
        } else if (c == ';') {
            segs.push_back(cur);
            cur.clear();
            ++i;
        } else if (c == '&' && i + 1 < line.size() && line[i + 1] == '&') {
            segs.push_back(cur);
            cur.clear();
            i += 2;
        } else {
            cur.push_back(c);
            ++i;
        }
    }
    segs.push_back(cur);
    return segs;
}

std::string mode_string(FsNodeType type, int mode) {
    std::string s;
    s.push_back(type == FsNodeType::dir      ? 'd'
                : type == FsNodeType::symlink ? 'l'
                                              : '-');
    const char* rwx = "rwxrwxrwx";
    for (int i = 0; i < 9; ++i)
        s.push_back((mode >> (8 - i)) & 1 ? rwx[i] : '-');
    return s;
}

std::string ls_date(std::int64_t ms) {
    static const char* months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    time_t secs = static_cast<time_t>(ms / 1000);
    tm g{};
    gmtime_r(&secs, &g);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s %2d  %04d", months[g.tm_mon],
                  g.tm_mday, g.tm_year + 1900);
    return buf;
}

bool looks_printable(const std::string& data) {
    for (unsigned char c : data) {
        if (c == '\t' || c == '\n' || c == '\r') continue;
        if (c < 0x20 || c > 0x7e) return false;
    }
    return true;
}

// minimal capped HTTP/1.0 GET used only by fetch-mode download capture
struct FetchResult {
    std::string body;
    bool truncated = false;
};

std::optional<FetchResult> http_get_capped(const std::string& url,
                                           int timeout_ms,
                                           std::int64_t max_bytes) {
    if (!starts_with(url, "http://")) return std::nullopt;
    std::string rest = url.substr(7);
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    std::string host = hostport;
    int port = 80;
    auto colon = hostport.rfind(':');
    if (colon != std::string::npos) {
        host = hostport.substr(0, colon);
        port = std::atoi(hostport.c_str() + colon + 1);
        if (port <= 0 || port > 65535) return std::nullopt;
    }
    if (host.empty()) return std::nullopt;

    std::string err;
    auto conn = tcp_connect(host, port, timeout_ms, err);
    if (!conn) return std::nullopt;
    std::string req = "GET " + path + " HTTP/1.0\r\nHost: " + host +
                      "\r\nUser-Agent: Wget\r\nConnection: close\r\n\r\n";
    if (!conn->write_all(req)) return std::nullopt;

    std::string data;
    char buf[4096];
    std::int64_t cap = max_bytes + 16384;  // headroom for headers
    for (;;) {
        int n = conn->read_some(buf, sizeof(buf));
        if (n <= 0) break;
        data.append(buf, static_cast<std::size_t>(n));
        if (static_cast<std::int64_t>(data.size()) > cap) break;
    }
    auto hdr_end = data.find("\r\n\r\n");
    std::size_t body_at;
    if (hdr_end != std::string::npos) {
        body_at = hdr_end + 4;
    } else {
        hdr_end = data.find("\n\n");
        if (hdr_end == std::string::npos) return std::nullopt;
        body_at = hdr_end + 2;
    }
    std::string status_line = data.substr(0, data.find('\n'));
    auto sp = status_line.find(' ');
    if (sp == std::string::npos || sp + 1 >= status_line.size() ||
        status_line[sp + 1] != '2')
        return std::nullopt;

    FetchResult out;
    out.body = data.substr(body_at);
    if (static_cast<std::int64_t>(out.body.size()) > max_bytes) {
        out.body.resize(static_cast<std::size_t>(max_bytes));
        out.truncated = true;
    }
    return out;
}

std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    std::string base =
        slash == std::string::npos ? path : path.substr(slash + 1);
    return base.empty() ? "index.html" : base;
}

}  // namespace

std::vector<ParsedCommand> parse_command_line(const std::string& line) {
    std::vector<ParsedCommand> out;
    for (const auto& seg : split_segments(line)) {
        ParsedCommand cmd;
        cmd.raw = trim(seg);
        auto tokens = tokenize(seg);

        std::vector<std::vector<std::string>> pipeline;
        std::vector<std::string> stage;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const Token& t = tokens[i];
            if (!t.quoted && t.text == "|") {
                pipeline.push_back(stage);
                stage.clear();
                continue;
            }
            if (!t.quoted && t.text == "&") continue;  // background marker
            if (!t.quoted && (t.text == ">" || t.text == ">>")) {
                cmd.redirect_append = t.text == ">>";
                if (i + 1 < tokens.size()) {
                    cmd.redirect_path = tokens[i + 1].text;
                    ++i;
                }
                continue;
            }
            if (!t.quoted &&
                (starts_with(t.text, "2>") || starts_with(t.text, "1>")))
                continue;  // fd redirect noise, not analytics signal
            stage.push_back(t.text);
        }
        pipeline.push_back(stage);
        cmd.pipeline = std::move(pipeline);
        out.push_back(std::move(cmd));
    }
    return out;
}

int TelnetStream::read_some(char* buf, std::size_t len) {
    char raw[1024];
    for (;;) {
        std::size_t want = std::min(len, sizeof(raw));
        int n = inner_.read_some(raw, want);
        if (n <= 0) return n;
        std::size_t out = 0;
        std::string reply;
        for (int i = 0; i < n; ++i) {
            unsigned char c = static_cast<unsigned char>(raw[i]);
            switch (state_) {
                case 0:
                    if (c == 255)
                        state_ = 1;
                    else
                        buf[out++] = raw[i];
                    break;
                case 1:  // after IAC
                    if (c == 255) {
                        buf[out++] = static_cast<char>(255);
                        state_ = 0;
                    } else if (c == 250) {  // SB
                        state_ = 3;
                    } else if (c >= 251 && c <= 254) {  // WILL WONT DO DONT
                        pending_verb_ = static_cast<char>(c);
                        state_ = 2;
                    } else {
                        state_ = 0;  // NOP and friends
                    }
                    break;
                case 2: {  // option byte
                    unsigned char verb = static_cast<unsigned char>(pending_verb_);
                    if (verb == 253) {  // DO -> WONT
                        reply += "\xff\xfc";
                        reply += static_cast<char>(c);
                    } else if (verb == 251) {  // WILL -> DONT
                        reply += "\xff\xfe";
                        reply += static_cast<char>(c);
                    }
                    // WONT/DONT are refusals; answering them loops
                    state_ = 0;
                    break;
                }
                case 3:  // inside SB until IAC SE
                    if (c == 255) state_ = 4;
                    break;
                case 4:
                    state_ = c == 240 ? 0 : 3;
                    break;
            }
        }
        if (!reply.empty()) inner_.write_all(reply);
        bytes_written_ = inner_.bytes_written();
        if (out > 0) return static_cast<int>(out);
        // consumed pure negotiation; read again
    }
}

ShellSession::ShellSession(const ShellConfig& cfg, SessionEmitter& emitter,
                           Clock& clock, Rng& rng, std::int64_t boot_ms)
    : cfg_(cfg),
      emitter_(emitter),
      clock_(clock),
      rng_(rng),
      fs_(*cfg.fs, overlay_, GenContext{cfg.profile, &clock, boot_ms}) {}

bool ShellSession::try_login(const std::string& username,
                             const std::string& password) {
    bool ok = cfg_.policy.accepts(username, password);
    AuthAttempt a;
    a.username = sanitize_capture(username);
    a.password = sanitize_capture(password);
    a.success = ok;
    a.mechanism = AuthMechanism::shell_login;
    emitter_.emit(a);
    if (ok) {
        authenticated_ = true;
        consecutive_failures_ = 0;
        username_ = sanitize_capture(username);
        std::string home = username_ == "root" ? "/root" : "/home/" + username_;
        if (!fs_.stat(home)) home = "/";
        cwd_ = home;
        env_["HOME"] = home;
        env_["PATH"] = "/bin:/sbin:/usr/bin:/usr/sbin";
        env_["USER"] = username_;
        env_["SHELL"] = "/bin/sh";
        env_["TERM"] = "vt100";
    } else {
        ++consecutive_failures_;
    }
    return ok;
}

std::string ShellSession::prompt() const {
    return username_ == "root" ? "# " : "$ ";
}

std::string ShellSession::expand_token(const std::string& token) const {
    if (token.find('$') == std::string::npos) return token;
    std::string out;
    std::size_t i = 0;
    while (i < token.size()) {
        if (token[i] != '$') {
            out.push_back(token[i++]);
            continue;
        }
        ++i;
        if (i >= token.size()) {
            out.push_back('$');
            break;
        }
        if (token[i] == '?') {
            out += std::to_string(last_exit_);
            ++i;
            continue;
        }
        bool braced = token[i] == '{';
        if (braced) ++i;
        std::string name;
        while (i < token.size() &&
               (std::isalnum(static_cast<unsigned char>(token[i])) ||
                token[i] == '_'))
            name.push_back(token[i++]);
        if (braced && i < token.size() && token[i] == '}') ++i;
        if (name.empty()) {
            out.push_back('$');
            if (braced) out.push_back('{');
            continue;
        }
        auto it = env_.find(name);
        if (it != env_.end()) out += it->second;
    }
    return out;
}

std::string ShellSession::handle_line(const std::string& line) {
    if (!trim(line).empty()) history_.push_back(trim(line));
    std::string combined;
    for (const auto& cmd : parse_command_line(line)) {
        CommandOutput result = execute_segment(cmd);
        combined += result.text;
        if (wants_exit_) break;
    }
    return combined;
}

CommandOutput ShellSession::execute_segment(const ParsedCommand& cmd) {
    CommandOutput result;
    const std::vector<std::string>* argv =
        cmd.pipeline.empty() ? nullptr : &cmd.pipeline.front();
    try {
        if (argv && !argv->empty()) {
            result = run_argv(*argv, cmd.raw);
        }
        if (!cmd.redirect_path.empty()) {
            std::string abs = fs_.normalize(cwd_, cmd.redirect_path);
            if (fs_.write(abs, result.text, cmd.redirect_append)) {
                result.text.clear();
            } else {
                result.text = "-sh: cannot create " + cmd.redirect_path +
                              ": nonexistent directory\n";
                result.exit_status = 1;
            }
        }
    } catch (...) {
        // degrade, never kill the session thread
        result.text = "-sh: " + (argv && !argv->empty() ? (*argv)[0] : "") +
                      ": not found\n";
        result.exit_status = 127;
    }

    CommandEvent ev;
    ev.raw_line = sanitize_capture(cmd.raw);
    if (argv)
        for (const auto& a : *argv) ev.argv.push_back(sanitize_capture(a));
    ev.exit_status = result.exit_status;
    ev.output_bytes = static_cast<std::int64_t>(result.text.size());
    emitter_.emit(ev);

    last_exit_ = result.exit_status;
    return result;
}

CommandOutput ShellSession::run_argv(const std::vector<std::string>& argv,
                                     const std::string& raw) {
    std::vector<std::string> expanded;
    expanded.reserve(argv.size());
    for (const auto& a : argv) expanded.push_back(expand_token(a));

    std::string name = expanded[0];
    std::vector<std::string> args(expanded.begin() + 1, expanded.end());

    if (name.find('/') != std::string::npos) {
        // path invocation: resolve against the fake tree
        std::string abs = fs_.normalize(cwd_, name);
        auto entry = fs_.lstat(abs);
        if (!entry)
            return {"-sh: " + name + ": not found\n", 127};
        std::string leaf = abs.substr(abs.find_last_of('/') + 1);
        if (entry->type == FsNodeType::dir)
            return {"-sh: " + name + ": Permission denied\n", 126};
        if (entry->from_overlay)  // session-written files are not executable
            return {"-sh: " + name + ": Permission denied\n", 126};
        if (leaf == "busybox") return busybox_command(args, raw);
        name = leaf;
    }

    if (name == "busybox") return busybox_command(args, raw);
    return run_named(name, std::move(args), raw);
}

CommandOutput ShellSession::busybox_command(const std::vector<std::string>& args,
                                            const std::string& raw) {
    if (args.empty()) return {cfg_.profile->applet_listing, 0};
    const std::string& applet = args[0];
    if (!cfg_.profile->applet_names.count(applet))
        return {applet + ": applet not found\n", 127};
    std::vector<std::string> rest(args.begin() + 1, args.end());
    return run_named(applet, std::move(rest), raw);
}

CommandOutput ShellSession::download_command(
    const std::string& tool, const std::vector<std::string>& args) {
    std::vector<std::string> urls;
    std::string local_name;
    bool next_is_output = false;

    if (tool == "tftp") {
        // busybox form: tftp [-g] [-r remote] [-l local] host [port]
        std::string remote, host;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a == "-g" || a == "-p") continue;
            if (a == "-r" && i + 1 < args.size()) {
                remote = args[++i];
                continue;
            }
            if (a == "-l" && i + 1 < args.size()) {
                local_name = args[++i];
                continue;
            }
            if (!a.empty() && a[0] == '-') continue;
            if (host.empty()) host = a;
        }
        if (host.empty())
            return {cfg_.profile->busybox_banner +
                        "\n\nUsage: tftp [OPTIONS] HOST [PORT]\n",
                    1};
        urls.push_back("tftp://" + host + "/" + (remote.empty() ? "" : remote));
        if (local_name.empty()) local_name = basename_of(remote);
    } else {
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (next_is_output) {
                local_name = a;
                next_is_output = false;
                continue;
            }
            if (a == "-O" || a == "-o") {
                next_is_output = true;
                continue;
            }
            if (!a.empty() && a[0] == '-') continue;
            if (contains(a, "://")) {
                urls.push_back(a);
            } else if (contains(a, "/") || contains(a, ".")) {
                // bots routinely omit the scheme
                urls.push_back("http://" + a);
            }
        }
        if (urls.empty())
            return {tool == "wget"
                        ? "wget: missing URL\nUsage: wget [OPTIONS] URL\n"
                        : "curl: try 'curl --help' for more information\n",
                    1};
    }

    std::string out;
    for (const auto& url : urls) {
        DownloadEvent ev;
        ev.url = sanitize_capture(url);

        std::string content;
        bool have_content = false;
        if (cfg_.download_mode == DownloadMode::fetch && cfg_.artifacts) {
            auto fetched =
                http_get_capped(url, cfg_.fetch_timeout_ms, cfg_.max_artifact_bytes);
            if (fetched) {
                auto stored = cfg_.artifacts->put(fetched->body);
                ev.sha256 = stored.sha256;
                ev.size_bytes = stored.size_bytes;
                ev.stored_path = stored.relative_path;
                ev.fetched = true;
                ev.truncated = fetched->truncated;
                content = fetched->body;
                have_content = true;
            }
        }
        emitter_.emit(ev);

        std::string fname = local_name.empty() ? basename_of(url) : local_name;
        // the attacker must believe the transfer worked
        std::string host = url;
        if (auto p = host.find("://"); p != std::string::npos)
            host = host.substr(p + 3);
        if (auto p = host.find('/'); p != std::string::npos)
            host = host.substr(0, p);
        std::int64_t shown =
            have_content ? static_cast<std::int64_t>(content.size())
                         : static_cast<std::int64_t>(
                               1024 + (rng_.uniform(0, 900) * 16));
        if (tool != "tftp")
            out += "Connecting to " + host + " (" + host + ":80)\n";
        out += format_size_bar(fname, shown);

        std::string abs = fs_.normalize(cwd_, fname);
        fs_.write(abs, have_content ? content : std::string(), false);
    }
    return {out, 0};
}

CommandOutput ShellSession::run_named(const std::string& name,
                                      std::vector<std::string> args,
                                      const std::string& raw) {
    const DeviceProfile& prof = *cfg_.profile;

    auto not_found = [&]() -> CommandOutput {
        // present-on-device applets without an emulation answer silently
        if (prof.applet_names.count(name)) return {"", 0};
        return {"-sh: " + name + ": not found\n", 127};
    };

    if (name == "exit" || name == "logout" || name == "quit") {
        wants_exit_ = true;
        return {"", 0};
    }

    if (name == "cd") {
        std::string target = args.empty() ? env_["HOME"] : args[0];
        if (target.empty()) target = "/";
        std::string abs = fs_.normalize(cwd_, target);
        auto v = fs_.stat(abs);
        if (!v || v->type != FsNodeType::dir)
            return {"-sh: cd: can't cd to " + args[0] + "\n", 1};
        cwd_ = abs;
        return {"", 0};
    }

    if (name == "pwd") return {cwd_ + "\n", 0};

    if (name == "echo") {
        bool newline = true, interpret = false;
        std::size_t i = 0;
        for (; i < args.size(); ++i) {
            if (args[i] == "-n")
                newline = false;
            else if (args[i] == "-e")
                interpret = true;
            else if (args[i] == "-en" || args[i] == "-ne") {
                newline = false;
                interpret = true;
            } else
                break;
        }
        std::string joined;
        for (std::size_t k = i; k < args.size(); ++k) {
            if (k > i) joined.push_back(' ');
            joined += args[k];
        }
        if (interpret) {
            std::string out;
            for (std::size_t k = 0; k < joined.size(); ++k) {
                if (joined[k] != '\\' || k + 1 >= joined.size()) {
                    out.push_back(joined[k]);
                    continue;
                }
                char c = joined[++k];
                switch (c) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    case '\\': out.push_back('\\'); break;
                    case '0': out.push_back('\0'); break;
                    case 'x': {
                        int v = 0, used = 0;
                        while (used < 2 && k + 1 < joined.size() &&
                               std::isxdigit(static_cast<unsigned char>(
                                   joined[k + 1]))) {
                            char h = joined[++k];
                            v = v * 16 + (std::isdigit(static_cast<unsigned char>(h))
                                              ? h - '0'
                                              : std::tolower(h) - 'a' + 10);
                            ++used;
                        }
                        if (used > 0)
                            out.push_back(static_cast<char>(v));
                        else
                            out += "\\x";
                        break;
                    }
                    default:
                        out.push_back('\\');
                        out.push_back(c);
                }
            }
            joined = out;
        }
        if (newline) joined.push_back('\n');
        return {joined, 0};
    }

    if (name == "export") {
        for (const auto& a : args) {
            auto eq = a.find('=');
            if (eq == std::string::npos) continue;  // plain re-export, or junk
            std::string key = a.substr(0, eq);
            bool valid = !key.empty() &&
                         (std::isalpha(static_cast<unsigned char>(key[0])) ||
                          key[0] == '_');
            for (char c : key)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                    valid = false;
            if (valid) env_[key] = a.substr(eq + 1);
        }
        return {"", 0};
    }

    if (name == "env" || name == "set") {
        std::string out;
        for (const auto& [k, v] : env_) out += k + "=" + v + "\n";
        return {out, 0};
    }

    if (name == "ls") {
        bool long_fmt = false, all = false;
        std::vector<std::string> paths;
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') {
                if (contains(a, "l")) long_fmt = true;
                if (contains(a, "a")) all = true;
            } else {
                paths.push_back(a);
            }
        }
        if (paths.empty()) paths.push_back(".");

        std::string out;
        int status = 0;
        bool label_dirs = paths.size() > 1;
        for (std::size_t p = 0; p < paths.size(); ++p) {
            std::string abs = fs_.normalize(cwd_, paths[p]);
            auto v = fs_.stat(abs);
            if (!v) {
                out += "ls: " + paths[p] + ": No such file or directory\n";
                status = 1;
                continue;
            }
            std::vector<DirEntry> entries;
            if (v->type == FsNodeType::dir) {
                auto listing = fs_.list(abs);
                if (listing) entries = std::move(*listing);
                if (all) {
                    NodeView self = *v;
                    entries.insert(entries.begin(),
                                   {std::string(".."), self});
                    entries.insert(entries.begin(), {std::string("."), self});
                }
            } else {
                auto lv = fs_.lstat(abs);
                entries.push_back({paths[p], lv ? *lv : *v});
            }
            if (label_dirs && v->type == FsNodeType::dir)
                out += (p ? "\n" : "") + paths[p] + ":\n";
            for (const auto& e : entries) {
                if (!all && !e.name.empty() && e.name[0] == '.') continue;
                if (long_fmt) {
                    std::int64_t size = e.view.size;
                    if (e.view.type == FsNodeType::dir && size == 0) size = 1024;
                    char line[512];
                    std::snprintf(line, sizeof(line),
                                  "%s %4d %-8s %-8s %9lld %s %s",
                                  mode_string(e.view.type, e.view.mode).c_str(),
                                  e.view.type == FsNodeType::dir ? 2 : 1,
                                  e.view.owner.c_str(), e.view.owner.c_str(),
                                  static_cast<long long>(size),
                                  ls_date(e.view.mtime_ms).c_str(),
                                  e.name.c_str());
                    out += line;
                    if (e.view.type == FsNodeType::symlink)
                        out += " -> " + e.view.symlink_target;
                    out += "\n";
                } else {
                    out += e.name + "\n";
                }
            }
        }
        return {out, status};
    }

    if (name == "cat") {
        if (args.empty()) return {"", 0};
        std::string out;
        int status = 0;
        for (const auto& a : args) {
            std::string abs = fs_.normalize(cwd_, a);
            auto v = fs_.stat(abs);
            if (!v) {
                out += "cat: can't open '" + a + "': No such file or directory\n";
                status = 1;
                continue;
            }
            if (v->type == FsNodeType::dir) {
                out += "cat: read error: Is a directory\n";
                status = 1;
                continue;
            }
            auto content = fs_.read(abs);
            if (content) out += *content;
        }
        return {out, status};
    }

    if (name == "grep" || name == "egrep" || name == "fgrep") {
        std::vector<std::string> rest;
        for (const auto& a : args)
            if (a.empty() || a[0] != '-') rest.push_back(a);
        if (rest.empty()) return {"", 1};
        std::string pattern = rest[0];
        if (rest.size() == 1) return {"", 1};  // stdin: nothing to match
        std::string out;
        bool matched = false;
        int status = 0;
        for (std::size_t f = 1; f < rest.size(); ++f) {
            std::string abs = fs_.normalize(cwd_, rest[f]);
            auto content = fs_.read(abs);
            if (!content) {
                out += "grep: " + rest[f] + ": No such file or directory\n";
                status = 2;
                continue;
            }
            for (const auto& line : split(*content, '\n')) {
                if (contains(line, pattern)) {
                    if (rest.size() > 2) out += rest[f] + ":";
                    out += line + "\n";
                    matched = true;
                }
            }
        }
        if (status == 0) status = matched ? 0 : 1;
        return {out, status};
    }

    if (name == "uname") {
        if (args.empty()) return {prof.uname_sysname + "\n", 0};
        bool a = false, s = false, n = false, r = false, v = false, m = false;
        for (const auto& arg : args) {
            if (arg.empty() || arg[0] != '-')
                return {"uname: invalid option\n", 1};
            for (std::size_t i = 1; i < arg.size(); ++i) {
                switch (arg[i]) {
                    case 'a': a = true; break;
                    case 's': s = true; break;
                    case 'n': n = true; break;
                    case 'r': r = true; break;
                    case 'v': v = true; break;
                    case 'm': m = true; break;
                    case 'p': m = true; break;
                    default:
                        return {"uname: invalid option -- '" +
                                    std::string(1, arg[i]) + "'\n",
                                1};
                }
            }
        }
        if (a) return {prof.uname_line() + "\n", 0};
        std::vector<std::string> parts;
        if (s) parts.push_back(prof.uname_sysname);
        if (n) parts.push_back(prof.hostname);
        if (r) parts.push_back(prof.uname_release);
        if (v) parts.push_back(prof.uname_version);
        if (m) parts.push_back(prof.uname_machine);
        if (parts.empty()) parts.push_back(prof.uname_sysname);
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i)
            out += (i ? " " : "") + parts[i];
        return {out + "\n", 0};
    }

    if (name == "free") return {prof.free_output, 0};
    if (name == "ps") return {prof.ps_output, 0};

    if (name == "id") {
        if (username_ == "root")
            return {"uid=0(root) gid=0(root) groups=0(root)\n", 0};
        return {"uid=1000(" + username_ + ") gid=1000(" + username_ +
                    ") groups=1000(" + username_ + ")\n",
                0};
    }
    if (name == "whoami") return {username_ + "\n", 0};
    if (name == "hostname") return {prof.hostname + "\n", 0};

    if (name == "wget" || name == "curl" || name == "tftp")
        return download_command(name, args);

    if (name == "file") {
        if (args.empty())
            return {"Usage: file [OPTION...] [FILE...]\n", 1};
        std::string out;
        int status = 0;
        for (const auto& a : args) {
            std::string abs = fs_.normalize(cwd_, a);
            auto mapped = prof.filemap.find(abs);
            if (mapped != prof.filemap.end()) {
                out += a + ": " + mapped->second + "\n";
                continue;
            }
            auto lv = fs_.lstat(abs);
            if (!lv) {
                out += a + ": cannot open (No such file or directory)\n";
                status = 1;
                continue;
            }
            if (lv->type == FsNodeType::symlink) {
                out += a + ": symbolic link to " + lv->symlink_target + "\n";
                continue;
            }
            if (lv->type == FsNodeType::dir) {
                out += a + ": directory\n";
                continue;
            }
            auto content = fs_.read(abs);
            std::string desc;
            if (!content || content->empty()) {
                desc = "empty";
            } else if (content->size() >= 4 &&
                       content->compare(0, 4, "\x7f"
                                              "ELF") == 0) {
                auto fallback = prof.filemap.find("default-elf");
                desc = fallback != prof.filemap.end()
                           ? fallback->second
                           : "ELF 32-bit LSB executable";
            } else if (looks_printable(*content)) {
                desc = "ASCII text";
            } else {
                desc = "data";
            }
            out += a + ": " + desc + "\n";
        }
        return {out, status};
    }

    if (name == "mkdir") {
        int status = 0;
        std::string out;
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') continue;
            std::string abs = fs_.normalize(cwd_, a);
            if (fs_.stat(abs)) {
                out += "mkdir: can't create directory '" + a +
                       "': File exists\n";
                status = 1;
            } else if (!fs_.mkdir(abs)) {
                out += "mkdir: can't create directory '" + a +
                       "': No such file or directory\n";
                status = 1;
            }
        }
        return {out, status};
    }

    if (name == "rm") {
        bool force = false;
        std::vector<std::string> paths;
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') {
                if (contains(a, "f")) force = true;
            } else {
                paths.push_back(a);
            }
        }
        std::string out;
        int status = 0;
        for (const auto& a : paths) {
            std::string abs = fs_.normalize(cwd_, a);
            if (!fs_.stat(abs)) {
                if (!force) {
                    out += "rm: can't remove '" + a +
                           "': No such file or directory\n";
                    status = 1;
                }
                continue;
            }
            fs_.remove(abs);
        }
        return {out, status};
    }

    if (name == "touch") {
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') continue;
            std::string abs = fs_.normalize(cwd_, a);
            auto existing = fs_.read(abs);
            fs_.write(abs, existing.value_or(""), false);
        }
        return {"", 0};
    }

    if (name == "chmod" || name == "chown") {
        if (args.size() < 2)
            return {prof.busybox_banner + "\n\nUsage: " + name +
                        " [-R] MODE FILE...\n",
                    1};
        std::string out;
        int status = 0;
        for (std::size_t i = 1; i < args.size(); ++i) {
            if (!args[i].empty() && args[i][0] == '-') continue;
            std::string abs = fs_.normalize(cwd_, args[i]);
            if (!fs_.stat(abs)) {
                out += name + ": " + args[i] + ": No such file or directory\n";
                status = 1;
            }
        }
        return {out, status};
    }

    if (name == "cp" || name == "mv") {
        std::vector<std::string> paths;
        for (const auto& a : args)
            if (a.empty() || a[0] != '-') paths.push_back(a);
        if (paths.size() < 2)
            return {prof.busybox_banner + "\n\nUsage: " + name +
                        " [OPTIONS] SOURCE DEST\n",
                    1};
        std::string src = fs_.normalize(cwd_, paths[0]);
        std::string dst = fs_.normalize(cwd_, paths[1]);
        auto content = fs_.read(src);
        if (!content)
            return {name + ": can't stat '" + paths[0] +
                        "': No such file or directory\n",
                    1};
        auto dv = fs_.stat(dst);
        if (dv && dv->type == FsNodeType::dir)
            dst = (dst == "/" ? "" : dst) + "/" + basename_of(src);
        fs_.write(dst, *content, false);
        if (name == "mv") fs_.remove(src);
        return {"", 0};
    }

    if (name == "dd") {
        std::string ifile, ofile;
        std::int64_t bs = 512, count = -1;
        for (const auto& a : args) {
            if (starts_with(a, "if=")) ifile = a.substr(3);
            else if (starts_with(a, "of=")) ofile = a.substr(3);
            else if (starts_with(a, "bs=")) bs = std::atoll(a.c_str() + 3);
            else if (starts_with(a, "count=")) count = std::atoll(a.c_str() + 6);
        }
        if (bs <= 0) bs = 512;
        std::string data;
        if (!ifile.empty()) {
            auto content = fs_.read(fs_.normalize(cwd_, ifile));
            if (!content)
                return {"dd: can't open '" + ifile +
                            "': No such file or directory\n",
                        1};
            data = *content;
        }
        if (count >= 0 &&
            static_cast<std::int64_t>(data.size()) > bs * count)
            data.resize(static_cast<std::size_t>(bs * count));
        std::int64_t full = bs ? static_cast<std::int64_t>(data.size()) / bs : 0;
        std::int64_t partial = static_cast<std::int64_t>(data.size()) % bs ? 1 : 0;
        std::string records = std::to_string(full) + "+" +
                              std::to_string(partial) + " records in\n" +
                              std::to_string(full) + "+" +
                              std::to_string(partial) + " records out\n";
        if (!ofile.empty()) {
            fs_.write(fs_.normalize(cwd_, ofile), data, false);
            return {records, 0};
        }
        return {data + records, 0};
    }

    if (name == "head" || name == "tail") {
        long n = 10;
        std::vector<std::string> files;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a == "-n" && i + 1 < args.size()) {
                n = std::atol(args[++i].c_str());
            } else if (a.size() > 1 && a[0] == '-' &&
                       std::isdigit(static_cast<unsigned char>(a[1]))) {
                n = std::atol(a.c_str() + 1);
            } else if (!a.empty() && a[0] != '-') {
                files.push_back(a);
            }
        }
        if (files.empty()) return {"", 0};
        std::string out;
        int status = 0;
        for (const auto& f : files) {
            auto content = fs_.read(fs_.normalize(cwd_, f));
            if (!content) {
                out += name + ": can't open '" + f +
                       "': No such file or directory\n";
                status = 1;
                continue;
            }
            auto lines = split(*content, '\n');
            if (!lines.empty() && lines.back().empty()) lines.pop_back();
            std::size_t take = n < 0 ? 0 : static_cast<std::size_t>(n);
            std::size_t from = 0, to = lines.size();
            if (name == "head")
                to = std::min(lines.size(), take);
            else
                from = lines.size() > take ? lines.size() - take : 0;
            for (std::size_t i = from; i < to; ++i) out += lines[i] + "\n";
        }
        return {out, status};
    }

    if (name == "wc") {
        std::string out;
        int status = 0;
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') continue;
            auto content = fs_.read(fs_.normalize(cwd_, a));
            if (!content) {
                out += "wc: " + a + ": No such file or directory\n";
                status = 1;
                continue;
            }
            long lines = std::count(content->begin(), content->end(), '\n');
            long words = 0;
            bool in_word = false;
            for (char c : *content) {
                if (std::isspace(static_cast<unsigned char>(c)))
                    in_word = false;
                else if (!in_word) {
                    in_word = true;
                    ++words;
                }
            }
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%7ld %7ld %7ld %s\n", lines,
                          words, static_cast<long>(content->size()), a.c_str());
            out += buf;
        }
        return {out, status};
    }

    if (name == "md5sum") {
        std::string out;
        int status = 0;
        for (const auto& a : args) {
            if (!a.empty() && a[0] == '-') continue;
            auto content = fs_.read(fs_.normalize(cwd_, a));
            if (!content) {
                out += "md5sum: " + a + ": No such file or directory\n";
                status = 1;
                continue;
            }
            out += md5_hex(*content) + "  " + a + "\n";
        }
        return {out, status};
    }

    if (name == "which") {
        static const char* dirs[] = {"/bin", "/sbin", "/usr/bin", "/usr/sbin"};
        std::string out;
        int status = 0;
        for (const auto& a : args) {
            bool found = false;
            for (const char* d : dirs) {
                std::string candidate = std::string(d) + "/" + a;
                if (fs_.lstat(candidate)) {
                    out += candidate + "\n";
                    found = true;
                    break;
                }
            }
            if (!found) status = 1;
        }
        return {out, status};
    }

    if (name == "date") {
        time_t secs = static_cast<time_t>(clock_.now_ms() / 1000);
        tm g{};
        gmtime_r(&secs, &g);
        char buf[64];
        strftime(buf, sizeof(buf), "%a %b %e %H:%M:%S UTC %Y", &g);
        return {std::string(buf) + "\n", 0};
    }

    if (name == "uptime") {
        auto uptime = fs_.read("/proc/uptime");
        double up = uptime ? std::atof(uptime->c_str()) : 0.0;
        long days = static_cast<long>(up) / 86400;
        long hours = (static_cast<long>(up) % 86400) / 3600;
        long mins = (static_cast<long>(up) % 3600) / 60;
        time_t secs = static_cast<time_t>(clock_.now_ms() / 1000);
        tm g{};
        gmtime_r(&secs, &g);
        char buf[160];
        if (days > 0)
            std::snprintf(buf, sizeof(buf),
                          " %02d:%02d:%02d up %ld days, %2ld:%02ld,  load "
                          "average: 0.12, 0.08, 0.05\n",
                          g.tm_hour, g.tm_min, g.tm_sec, days, hours, mins);
        else
            std::snprintf(buf, sizeof(buf),
                          " %02d:%02d:%02d up %2ld:%02ld,  load average: "
                          "0.12, 0.08, 0.05\n",
                          g.tm_hour, g.tm_min, g.tm_sec, hours, mins);
        return {buf, 0};
    }

    if (name == "sleep") {
        long seconds = args.empty() ? 0 : std::atol(args[0].c_str());
        if (seconds > 0)
            clock_.sleep_ms(std::min<std::int64_t>(seconds * 1000, 5000));
        return {"", 0};
    }

    if (name == "ping") {
        std::string host;
        long count = 4;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "-c" && i + 1 < args.size())
                count = std::atol(args[++i].c_str());
            else if (!args[i].empty() && args[i][0] != '-')
                host = args[i];
        }
        if (host.empty())
            return {prof.busybox_banner + "\n\nUsage: ping [OPTIONS] HOST\n", 1};
        count = std::clamp<long>(count, 1, 4);
        std::string out =
            "PING " + host + " (" + host + "): 56 data bytes\n";
        const char* times[] = {"8.291", "8.114", "8.402", "8.226"};
        for (long i = 0; i < count; ++i) {
            out += "64 bytes from " + host + ": seq=" + std::to_string(i) +
                   " ttl=64 time=" + times[i % 4] + " ms\n";
            clock_.sleep_ms(1000);
        }
        out += "\n--- " + host + " ping statistics ---\n";
        out += std::to_string(count) + " packets transmitted, " +
               std::to_string(count) + " packets received, 0% packet loss\n";
        out += "round-trip min/avg/max = 8.114/8.258/8.402 ms\n";
        return {out, 0};
    }

    if (name == "history") {
        std::string out;
        int i = 1;
        for (const auto& h : history_) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%5d  ", i++);
            out += buf + h + "\n";
        }
        return {out, 0};
    }

    if (name == "help") {
        return {"\nBuilt-in commands:\n------------------\n"
                "\t. : [ [[ alias bg break cd chdir command continue echo eval\n"
                "\texec exit export false fg getopts hash help history jobs kill\n"
                "\tlet local printf pwd read readonly return set shift source\n"
                "\ttimes trap true type ulimit umask unalias unset wait\n\n",
                0};
    }

    if (name == "true" || name == "sync" || name == ":") return {"", 0};
    if (name == "false") return {"", 1};
    if (name == "sh" || name == "ash") return {"", 0};
    if (name == "clear") return {"\x1b[H\x1b[J", 0};

    (void)raw;
    return not_found();
}

void run_shell_session(ByteStream& raw_stream, const ShellConfig& cfg,
                       EventSink& sink, Clock& clock, Rng& rng,
                       std::int64_t boot_ms) {
    TelnetStream telnet(raw_stream);
    ByteStream& stream =
        cfg.protocol == Protocol::telnet
            ? static_cast<ByteStream&>(telnet)
            : static_cast<ByteStream&>(raw_stream);

    SessionEmitter emitter(rng.session_id(), cfg.honeypot_id, clock, sink);

    try {
        LineReader reader(stream, 4096);

        std::optional<std::string> banner;
        bool banner_truncated = false;
        if (cfg.protocol == Protocol::ssh) {
            stream.write_all(cfg.profile->ssh_banner + "\r\n");
            auto first = reader.read_line();
            if (first) {
                std::string b = *first;
                if (b.size() > 255) {
                    b.resize(255);
                    banner_truncated = true;
                }
                banner = sanitize_capture(b);
            }
        }

        SessionOpen open;
        open.honeypot_id = cfg.honeypot_id;
        open.protocol = cfg.protocol;
        open.source_addr = stream.peer_addr();
        open.source_port = stream.peer_port();
        open.client_banner = banner;
        open.banner_truncated = banner_truncated;
        emitter.emit(open);

        ShellSession session(cfg, emitter, clock, rng, boot_ms);

        bool eof = false;
        while (!session.authenticated() && !eof) {
            if (!stream.write_all(to_wire(cfg.profile->hostname + " login: ")))
                break;
            auto user = reader.read_line();
            if (!user) {
                eof = true;
                break;
            }
            stream.write_all("Password: ");
            auto pass = reader.read_line();
            if (!pass) {
                eof = true;
                break;
            }
            if (!session.try_login(*user, *pass)) {
                stream.write_all(to_wire("\nLogin incorrect\n"));
                if (session.consecutive_failures() >= cfg.max_login_failures)
                    break;
            }
        }

        if (session.authenticated() && !eof) {
            stream.write_all(to_wire(cfg.profile->motd));
            while (!session.wants_exit()) {
                if (!stream.write_all(session.prompt())) break;
                auto line = reader.read_line();
                if (!line) break;
                std::string out = session.handle_line(*line);
                if (!out.empty())
                    if (!stream.write_all(to_wire(out))) break;
            }
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
