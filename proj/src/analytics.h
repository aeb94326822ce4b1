#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geo.h"
#include "store.h"

namespace apiary {

// ---- rankings ----

using CredentialCount =
    std::pair<std::pair<std::string, std::string>, std::int64_t>;

// all auth attempts (success and failure) grouped by exact pair, descending
// count, ties lexicographic by username then password
std::vector<CredentialCount> top_credentials(const EventStore& store, int n);

// command raw lines trimmed of surrounding whitespace, same ordering
std::vector<std::pair<std::string, std::int64_t>> top_commands(
    const EventStore& store, int n);

// signature_hit envelopes grouped by label, same ordering
std::vector<std::pair<std::string, std::int64_t>> signature_summary(
    const EventStore& store);

// longest-prefix country per session source, unmatched under "??"
std::vector<std::pair<std::string, std::int64_t>> geo_summarize(
    const EventStore& store, const GeoTable& geo);

// ---- session statistics ----

struct SessionStats {
    std::int64_t hits = 0;  // total sessions
    std::int64_t login_success_sessions = 0;
    std::int64_t command_exec_sessions = 0;
    // undefined (not 0) on an empty store
    std::optional<double> login_success_fraction;
    std::optional<double> command_exec_session_fraction;
    std::map<std::string, std::int64_t> per_honeypot;
};

SessionStats session_stats(const EventStore& store);

// ---- bot/human classification ----

enum class ClientClass { bot, human, unknown };
std::string_view client_class_name(ClientClass c);

// ordered (substring pattern -> class) rules; first match wins
class ClassifierRules {
public:
    // line format: `bot <substring>` or `human <substring>`, '#' comments
    static std::optional<ClassifierRules> parse(
        const std::string& text, std::vector<std::string>& errors);
    static std::optional<ClassifierRules> load_file(
        const std::string& path, std::vector<std::string>& errors);

    std::size_t size() const { return rules_.size(); }
    const std::vector<std::pair<std::string, ClientClass>>& rules() const {
        return rules_;
    }

private:
    friend ClientClass classify_client(const std::optional<std::string>&,
                                       const ClassifierRules&);
    std::vector<std::pair<std::string, ClientClass>> rules_;
};

ClientClass classify_client(const std::optional<std::string>& banner,
                            const ClassifierRules& rules);

// session counts per class over every session's client banner
std::map<ClientClass, std::int64_t> classify_sessions(
    const EventStore& store, const ClassifierRules& rules);

// ---- download categorization ----

struct ReputationVerdictView {
    std::optional<bool> malicious;
    std::string family;  // provider threat label excerpt, lowercased ok
};

class CategoryRules {
public:
    // stanza-free line format, first match wins:
    //   content <substring> <label>     (match on artifact bytes)
    //   family <substring> <label>      (match on reputation threat label)
    static std::optional<CategoryRules> parse(
        const std::string& text, std::vector<std::string>& errors);
    static std::optional<CategoryRules> load_file(
        const std::string& path, std::vector<std::string>& errors);

    const std::vector<std::pair<std::string, std::string>>& content_rules()
        const {
        return content_;
    }
    const std::vector<std::pair<std::string, std::string>>& family_rules()
        const {
        return family_;
    }

private:
    std::vector<std::pair<std::string, std::string>> content_;  // substr,label
    std::vector<std::pair<std::string, std::string>> family_;
};

// Local heuristics first (shell-downloader structure, content substrings),
// then the reputation family refines when the provider says malicious.
// Unresolvable stays "Others".
std::string categorize_download(const std::string& content,
                                const CategoryRules& rules,
                                const ReputationVerdictView* verdict);

}  // namespace apiary
