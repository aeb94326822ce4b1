#include "analytics.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "util.h"

namespace apiary {

namespace {

// descending count, tie-break ascending key (reproducible rankings)
template <typename Key>
std::vector<std::pair<Key, std::int64_t>> rank(
    const std::map<Key, std::int64_t>& counts, std::size_t n) {
    std::vector<std::pair<Key, std::int64_t>> out(counts.begin(),
                                                  counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (out.size() > n) out.resize(n);
    return out;
}

}  // namespace

std::vector<CredentialCount> top_credentials(const EventStore& store, int n) {
    if (n < 1) return {};
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;
    for (const auto& env : store.events()) {
        if (env.kind != EventKind::auth_attempt) continue;
        const auto& a = std::get<AuthAttempt>(env.payload);
        ++counts[{a.username, a.password}];
    }
    return rank(counts, static_cast<std::size_t>(n));
}

std::vector<std::pair<std::string, std::int64_t>> top_commands(
    const EventStore& store, int n) {
    if (n < 1) return {};
    std::map<std::string, std::int64_t> counts;
    for (const auto& env : store.events()) {
        if (env.kind != EventKind::command) continue;
        ++counts[trim(std::get<CommandEvent>(env.payload).raw_line)];
    }
    return rank(counts, static_cast<std::size_t>(n));
}

std::vector<std::pair<std::string, std::int64_t>> signature_summary(
    const EventStore& store) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& env : store.events())
        if (env.kind == EventKind::signature_hit)
            ++counts[std::get<SignatureHit>(env.payload).label];
    return rank(counts, counts.size());
}

std::vector<std::pair<std::string, std::int64_t>> geo_summarize(
    const EventStore& store, const GeoTable& geo) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& rec : store.sessions())
        ++counts[geo.match(rec.source_addr).value_or("??")];
    return rank(counts, counts.size());
}

SessionStats session_stats(const EventStore& store) {
    SessionStats out;
    out.hits = static_cast<std::int64_t>(store.sessions().size());
    for (const auto& rec : store.sessions()) {
        if (rec.auth_successes > 0) ++out.login_success_sessions;
        if (rec.commands > 0) ++out.command_exec_sessions;
        if (!rec.honeypot_id.empty()) ++out.per_honeypot[rec.honeypot_id];
    }
    if (out.hits > 0) {
        out.login_success_fraction =
            static_cast<double>(out.login_success_sessions) /
            static_cast<double>(out.hits);
        out.command_exec_session_fraction =
            static_cast<double>(out.command_exec_sessions) /
            static_cast<double>(out.hits);
    }
    return out;
}

std::string_view client_class_name(ClientClass c) {
    switch (c) {
        case ClientClass::bot: return "bot";
        case ClientClass::human: return "human";
        case ClientClass::unknown: return "unknown";
    }
    return "unknown";
}

std::optional<ClassifierRules> ClassifierRules::parse(
    const std::string& text, std::vector<std::string>& errors) {
    ClassifierRules out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto sp = t.find(' ');
        std::string cls = sp == std::string::npos ? t : t.substr(0, sp);
        std::string pattern =
            sp == std::string::npos ? "" : trim(t.substr(sp + 1));
        if ((cls != "bot" && cls != "human") || pattern.empty()) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": expected `bot <substring>` or "
                             "`human <substring>`");
            continue;
        }
        out.rules_.emplace_back(pattern, cls == "bot" ? ClientClass::bot
                                                      : ClientClass::human);
    }
    if (!errors.empty()) return std::nullopt;
    return out;
}

std::optional<ClassifierRules> ClassifierRules::load_file(
    const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open classifier rules: " + path);
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), errors);
}

ClientClass classify_client(const std::optional<std::string>& banner,
                            const ClassifierRules& rules) {
    if (!banner || banner->empty()) return ClientClass::unknown;
    for (const auto& [pattern, cls] : rules.rules_)
        if (contains(*banner, pattern)) return cls;
    return ClientClass::unknown;
}

std::map<ClientClass, std::int64_t> classify_sessions(
    const EventStore& store, const ClassifierRules& rules) {
    std::map<ClientClass, std::int64_t> out{{ClientClass::bot, 0},
                                            {ClientClass::human, 0},
                                            {ClientClass::unknown, 0}};
    for (const auto& rec : store.sessions())
        ++out[classify_client(rec.client_banner, rules)];
    return out;
}

std::optional<CategoryRules> CategoryRules::parse(
    const std::string& text, std::vector<std::string>& errors) {
    CategoryRules out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto sp1 = t.find(' ');
        auto sp2 = sp1 == std::string::npos ? std::string::npos
                                            : t.find(' ', sp1 + 1);
        if (sp2 == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": expected `content|family <substring> <label>`");
            continue;
        }
        std::string field = t.substr(0, sp1);
        std::string substr = t.substr(sp1 + 1, sp2 - sp1 - 1);
        std::string label = trim(t.substr(sp2 + 1));
        if (field == "content") {
            out.content_.emplace_back(substr, label);
        } else if (field == "family") {
            out.family_.emplace_back(substr, label);
        } else {
            errors.push_back("line " + std::to_string(lineno) +
                             ": unknown field '" + field + "'");
        }
    }
    if (!errors.empty()) return std::nullopt;
    return out;
}

std::optional<CategoryRules> CategoryRules::load_file(
    const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open category rules: " + path);
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), errors);
}

namespace {

// a fetch command plus loops over several architecture names marks the
// classic multi-arch dropper script
bool looks_like_shell_downloader(const std::string& content) {
    if (content.empty() || content[0] == '\x7f') return false;  // ELF
    bool fetch = contains(content, "wget") || contains(content, "curl") ||
                 contains(content, "tftp") || contains(content, "ftpget");
    if (!fetch) return false;
    int arch_hits = 0;
    for (const char* arch : {"x86", "arm", "mips", "i686", "i586", "sh4",
                             "m68k", "ppc", "sparc", "spc"})
        if (contains(content, arch)) ++arch_hits;
    return arch_hits >= 2;
}

}  // namespace

std::string categorize_download(const std::string& content,
                                const CategoryRules& rules,
                                const ReputationVerdictView* verdict) {
    std::string label;
    if (looks_like_shell_downloader(content)) {
        label = "SHELLDownloader";
    } else {
        for (const auto& [substr, rule_label] : rules.content_rules()) {
            if (contains(content, substr)) {
                label = rule_label;
                break;
            }
        }
    }
    // provider knowledge beats the local guess, but only for confirmed
    // malicious subjects with a recognizable family string
    if (verdict && verdict->malicious.value_or(false)) {
        std::string family = to_lower(verdict->family);
        for (const auto& [substr, rule_label] : rules.family_rules()) {
            if (contains(family, to_lower(substr))) {
                label = rule_label;
                break;
            }
        }
    }
    return label.empty() ? "Others" : label;
}

}  // namespace apiary
