#include "config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "util.h"

namespace apiary {

const std::map<std::string, double>& default_tell_weights() {
    static const std::map<std::string, double> weights = {
        {"accept-all-auth", 0.8},
        {"busybox-applet-response", 0.6},
        {"file-cmd-missing", 0.6},
        {"frozen-dynamic-fields", 0.4},
        {"known-banner", 0.9},
    };
    return weights;
}

namespace {

struct LineError {
    std::vector<std::string>& errors;
    int lineno;
    void add(const std::string& message) const {
        errors.push_back("line " + std::to_string(lineno) + ": " + message);
    }
};

// ${NAME} -> getenv(NAME); unset variables become empty
std::string expand_env(const std::string& value) {
    std::string out;
    std::size_t i = 0;
    while (i < value.size()) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            auto close = value.find('}', i + 2);
            if (close != std::string::npos) {
                std::string name = value.substr(i + 2, close - i - 2);
                const char* env = std::getenv(name.c_str());
                if (env) out += env;
                i = close + 1;
                continue;
            }
        }
        out += value[i++];
    }
    return out;
}

bool parse_listen(const std::string& value, std::string& addr, int& port) {
    auto colon = value.rfind(':');
    if (colon == std::string::npos || colon == 0) return false;
    addr = value.substr(0, colon);
    std::string port_text = value.substr(colon + 1);
    char* end = nullptr;
    long n = std::strtol(port_text.c_str(), &end, 10);
    if (port_text.empty() || *end != '\0' || n < 1 || n > 65535) return false;
    port = static_cast<int>(n);
    return true;
}

bool parse_bool(const std::string& value, bool& out) {
    if (value == "true" || value == "yes" || value == "1") {
        out = true;
        return true;
    }
    if (value == "false" || value == "no" || value == "0") {
        out = false;
        return true;
    }
    return false;
}

bool parse_positive(const std::string& value, std::int64_t& out) {
    char* end = nullptr;
    long long n = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0' || n < 1) return false;
    out = n;
    return true;
}

}  // namespace

std::optional<Config> Config::parse(const std::string& text,
                                    const std::filesystem::path& base_dir,
                                    std::vector<std::string>& errors) {
    Config cfg;
    cfg.base_dir = base_dir;

    enum class Section { none, honeypot, syslog, analytics, reputation,
                         vetting };
    Section section = Section::none;
    HoneypotEntry* hp = nullptr;
    SyslogEntry syslog;
    bool saw_syslog = false;
    ProviderConfig reputation;
    bool saw_reputation = false;
    // id -> header line, for duplicate reporting
    std::map<std::string, int> hp_lines;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        LineError err{errors, lineno};
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;

        if (t.front() == '[') {
            if (t.back() != ']') {
                err.add("unterminated section header");
                section = Section::none;
                hp = nullptr;
                continue;
            }
            std::string name = trim(t.substr(1, t.size() - 2));
            if (starts_with(name, "honeypot")) {
                std::string id = trim(name.substr(8));
                if (id.empty()) {
                    err.add("honeypot section needs an id: [honeypot <id>]");
                    section = Section::none;
                    hp = nullptr;
                    continue;
                }
                auto [it, fresh] = hp_lines.emplace(id, lineno);
                if (!fresh)
                    err.add("duplicate honeypot id '" + id +
                            "' (first defined at line " +
                            std::to_string(it->second) + ")");
                cfg.honeypots.emplace_back();
                hp = &cfg.honeypots.back();
                hp->id = id;
                hp->first_line = lineno;
                section = Section::honeypot;
            } else if (name == "syslog") {
                section = Section::syslog;
                saw_syslog = true;
                hp = nullptr;
            } else if (name == "analytics") {
                section = Section::analytics;
                hp = nullptr;
            } else if (name == "reputation") {
                section = Section::reputation;
                saw_reputation = true;
                hp = nullptr;
            } else if (name == "vetting") {
                section = Section::vetting;
                hp = nullptr;
            } else {
                err.add("unknown section [" + name + "]");
                section = Section::none;
                hp = nullptr;
            }
            continue;
        }

        auto eq = t.find('=');
        if (eq == std::string::npos) {
            err.add("expected key = value");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = expand_env(trim(t.substr(eq + 1)));
        if (key.empty()) {
            err.add("empty key");
            continue;
        }

        switch (section) {
            case Section::none:
                err.add("key '" + key + "' outside any section");
                break;
            case Section::honeypot: {
                if (key == "type") {
                    if (value == "shell") hp->type = HoneypotType::shell;
                    else if (value == "camera")
                        hp->type = HoneypotType::camera;
                    else
                        err.add("type must be shell or camera, got '" +
                                value + "'");
                } else if (key == "listen") {
                    if (!parse_listen(value, hp->listen_addr,
                                      hp->listen_port))
                        err.add("listen must be addr:port, got '" + value +
                                "'");
                } else if (key == "protocol") {
                    auto proto = protocol_from_name(value);
                    if (proto && *proto != Protocol::http) hp->protocol = *proto;
                    else err.add("protocol must be telnet or ssh");
                } else if (key == "policy") {
                    if (value == "accept_all")
                        hp->policy = CredentialPolicy::Phase::accept_all;
                    else if (value == "allowlist")
                        hp->policy = CredentialPolicy::Phase::allowlist;
                    else if (value == "single")
                        hp->policy = CredentialPolicy::Phase::single;
                    else
                        err.add("policy must be accept_all, allowlist or "
                                "single");
                } else if (key == "username") {
                    hp->username = value;
                } else if (key == "password") {
                    hp->password = value;
                } else if (key == "allowlist_file") {
                    hp->allowlist_file = value;
                } else if (key == "download_mode") {
                    if (value == "record_only")
                        hp->download_mode = DownloadMode::record_only;
                    else if (value == "fetch")
                        hp->download_mode = DownloadMode::fetch;
                    else
                        err.add("download_mode must be record_only or fetch");
                } else if (key == "signatures") {
                    hp->signatures_file = value;
                } else if (key == "profile") {
                    hp->profile_dir = value;
                } else if (key == "log_dir") {
                    hp->log_dir = value;
                } else if (key == "artifacts") {
                    hp->artifacts_dir = value;
                } else {
                    err.add("unknown honeypot key '" + key + "'");
                }
                break;
            }
            case Section::syslog: {
                if (key == "host") {
                    syslog.host = value;
                } else if (key == "port") {
                    std::int64_t port = 0;
                    if (parse_positive(value, port) && port <= 65535)
                        syslog.port = static_cast<int>(port);
                    else
                        err.add("syslog port out of range");
                } else {
                    err.add("unknown syslog key '" + key + "'");
                }
                break;
            }
            case Section::analytics: {
                if (key == "geo_table") cfg.analytics.geo_table = value;
                else if (key == "classifier") cfg.analytics.classifier = value;
                else if (key == "categories") cfg.analytics.categories = value;
                else err.add("unknown analytics key '" + key + "'");
                break;
            }
            case Section::reputation: {
                if (key == "provider") {
                    auto kind = reputation_source_from_name(value);
                    if (kind) reputation.kind = *kind;
                    else err.add("unknown reputation provider '" + value + "'");
                } else if (key == "base_url") {
                    reputation.base_url = value;
                } else if (key == "api_key") {
                    reputation.api_key = value;
                } else if (key == "cache_dir") {
                    reputation.cache_dir = value;
                } else if (key == "ttl_ms") {
                    std::int64_t ttl = 0;
                    if (parse_positive(value, ttl)) reputation.ttl_ms = ttl;
                    else err.add("ttl_ms must be a positive integer");
                } else if (key == "offline") {
                    if (!parse_bool(value, reputation.offline))
                        err.add("offline must be true or false");
                } else if (key == "timeout_ms") {
                    std::int64_t t_ms = 0;
                    if (parse_positive(value, t_ms))
                        reputation.timeout_ms = static_cast<int>(t_ms);
                    else
                        err.add("timeout_ms must be a positive integer");
                } else {
                    err.add("unknown reputation key '" + key + "'");
                }
                break;
            }
            case Section::vetting: {
                if (key == "allowlist") {
                    cfg.vetting.allowlist = value;
                } else if (key == "tell_db") {
                    cfg.vetting.tell_db = value;
                } else if (starts_with(key, "weight ")) {
                    std::string tell_id = trim(key.substr(7));
                    char* end = nullptr;
                    double w = std::strtod(value.c_str(), &end);
                    if (tell_id.empty()) {
                        err.add("weight needs a tell id: weight <id> = <w>");
                    } else if (value.empty() || *end != '\0' || w <= 0.0 ||
                               w > 1.0) {
                        err.add("weight for '" + tell_id +
                                "' must be in (0,1], got '" + value + "'");
                    } else {
                        cfg.vetting.weights[tell_id] = w;
                    }
                } else {
                    err.add("unknown vetting key '" + key + "'");
                }
                break;
            }
        }
    }

    if (saw_syslog) {
        if (syslog.host.empty())
            errors.push_back("syslog section needs a host");
        else
            cfg.syslog = syslog;
    }
    if (saw_reputation) {
        reputation.cache_dir = cfg.resolve(reputation.cache_dir);
        cfg.reputation = reputation;
    }

    // cross-entry validation, anchored to each honeypot's header line
    for (const auto& entry : cfg.honeypots) {
        auto fail = [&](const std::string& message) {
            errors.push_back("line " + std::to_string(entry.first_line) +
                             ": honeypot '" + entry.id + "': " + message);
        };
        if (entry.listen_port == 0) fail("missing listen = addr:port");
        if (entry.profile_dir.empty()) {
            fail("missing profile directory");
        } else if (!std::filesystem::is_directory(
                       cfg.resolve(entry.profile_dir))) {
            fail("profile directory not found: " +
                 cfg.resolve(entry.profile_dir));
        }
        if (entry.type == HoneypotType::shell) {
            if (entry.policy == CredentialPolicy::Phase::single &&
                (entry.username.empty() || entry.password.empty()))
                fail("policy single needs username and password");
            if (!entry.allowlist_file.empty() &&
                !std::filesystem::is_regular_file(
                    cfg.resolve(entry.allowlist_file)))
                fail("allowlist file not found: " +
                     cfg.resolve(entry.allowlist_file));
            if (!entry.signatures_file.empty())
                fail("signatures apply to camera honeypots only");
        } else {
            if (entry.signatures_file.empty())
                fail("camera needs a signatures file");
            else if (!std::filesystem::is_regular_file(
                         cfg.resolve(entry.signatures_file)))
                fail("signatures file not found: " +
                     cfg.resolve(entry.signatures_file));
        }
    }
    for (std::size_t i = 0; i < cfg.honeypots.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.honeypots.size(); ++j) {
            const auto& a = cfg.honeypots[i];
            const auto& b = cfg.honeypots[j];
            if (a.listen_port != b.listen_port || a.listen_port == 0)
                continue;
            bool same_host = a.listen_addr == b.listen_addr ||
                             a.listen_addr == "0.0.0.0" ||
                             b.listen_addr == "0.0.0.0";
            if (same_host)
                errors.push_back(
                    "line " + std::to_string(b.first_line) + ": honeypot '" +
                    b.id + "' listens on port " +
                    std::to_string(b.listen_port) + " already taken by '" +
                    a.id + "' (line " + std::to_string(a.first_line) + ")");
        }
    }

    // referenced analytics/vetting files must exist at load
    auto check_file = [&](const std::string& path, const std::string& what) {
        if (path.empty()) return;
        if (!std::filesystem::is_regular_file(cfg.resolve(path)))
            errors.push_back(what + " not found: " + cfg.resolve(path));
    };
    check_file(cfg.analytics.geo_table, "geo table");
    check_file(cfg.analytics.classifier, "classifier rules");
    check_file(cfg.analytics.categories, "category rules");
    check_file(cfg.vetting.allowlist, "vetting allowlist");
    check_file(cfg.vetting.tell_db, "tell db");

    if (!errors.empty()) return std::nullopt;
    return cfg;
}

std::optional<Config> Config::load_file(const std::string& path,
                                        std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open config: " + path);
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(),
                 std::filesystem::absolute(path).parent_path(), errors);
}

const HoneypotEntry* Config::honeypot(const std::string& id) const {
    for (const auto& entry : honeypots)
        if (entry.id == id) return &entry;
    return nullptr;
}

std::string Config::resolve(const std::string& path) const {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (base_dir / p).lexically_normal().string();
}

}  // namespace apiary
