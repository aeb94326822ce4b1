#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "event.h"
#include "reputation.h"
#include "shell.h"

namespace apiary {

enum class HoneypotType { shell, camera };

struct HoneypotEntry {
    std::string id;
    HoneypotType type = HoneypotType::shell;
    std::string listen_addr = "0.0.0.0";
    int listen_port = 0;
    // shell only
    Protocol protocol = Protocol::telnet;
    CredentialPolicy::Phase policy = CredentialPolicy::Phase::accept_all;
    std::string username;        // policy single
    std::string password;        // policy single
    std::string allowlist_file;  // policy allowlist, optional extra pairs
    DownloadMode download_mode = DownloadMode::record_only;
    // camera only
    std::string signatures_file;
    // both; resolved against the config file's directory
    std::string profile_dir;
    std::string log_dir = "logs";
    std::string artifacts_dir;
    int first_line = 0;  // where the [honeypot ...] header sits
};

struct SyslogEntry {
    std::string host;
    int port = 514;
};

struct AnalyticsEntry {
    std::string geo_table;
    std::string classifier;
    std::string categories;
};

struct VettingEntry {
    std::string allowlist;
    std::string tell_db;
    std::map<std::string, double> weights;  // tell id -> severity
};

// default severity per tell id; config [vetting] weight lines override
const std::map<std::string, double>& default_tell_weights();

// Sectioned key-value config. Sections: `[honeypot <id>]` (repeatable),
// `[syslog]`, `[analytics]`, `[reputation]`, `[vetting]`. `key = value`
// lines, '#' comments. Values may reference environment variables as
// ${NAME} (used for API keys). Relative paths resolve against the config
// file's directory. Validation collects every problem before failing.
struct Config {
    std::filesystem::path base_dir;
    std::vector<HoneypotEntry> honeypots;
    std::optional<SyslogEntry> syslog;
    AnalyticsEntry analytics;
    std::optional<ProviderConfig> reputation;
    VettingEntry vetting;

    static std::optional<Config> parse(const std::string& text,
                                       const std::filesystem::path& base_dir,
                                       std::vector<std::string>& errors);
    static std::optional<Config> load_file(const std::string& path,
                                           std::vector<std::string>& errors);

    const HoneypotEntry* honeypot(const std::string& id) const;
    // base_dir-resolved path, or the input if already absolute
    std::string resolve(const std::string& path) const;
};

}  // namespace apiary
