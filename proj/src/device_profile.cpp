#include "device_profile.h"

#include <fstream>
#include <sstream>

#include "clock.h"
#include "util.h"

namespace apiary {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// names in the listing appear after "Currently defined functions:",
// comma-separated across wrapped lines
std::set<std::string> parse_applet_names(const std::string& listing) {
    std::set<std::string> names;
    auto pos = listing.find("Currently defined functions:");
    if (pos == std::string::npos) return names;
    auto nl = listing.find('\n', pos);
    if (nl == std::string::npos) return names;
    for (const auto& token : split(listing.substr(nl + 1), ',')) {
        std::string name = trim(token);
        if (!name.empty()) names.insert(name);
    }
    return names;
}

}  // namespace

std::string DeviceProfile::uname_line() const {
    return uname_sysname + " " + hostname + " " + uname_release + " " +
           uname_version + " " + uname_machine + " GNU/Linux";
}

std::optional<std::string> DeviceProfile::read_asset(
    const std::string& name) const {
    return read_file(dir / name);
}

std::optional<DeviceProfile> DeviceProfile::load(
    const std::filesystem::path& dir, std::vector<std::string>& errors) {
    DeviceProfile p;
    p.dir = dir;

    auto conf_path = dir / "profile.conf";
    std::ifstream in(conf_path);
    if (!in) {
        errors.push_back("cannot open " + conf_path.string());
        return std::nullopt;
    }

    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back(conf_path.string() + ":" +
                             std::to_string(lineno) + ": expected key = value");
            continue;
        }
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }

    auto need = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) {
            errors.push_back(conf_path.string() + ": missing key '" +
                             std::string(key) + "'");
            return "";
        }
        return it->second;
    };

    p.hostname = need("hostname");
    p.ssh_banner = need("ssh_banner");
    p.uname_sysname = need("uname_sysname");
    p.uname_release = need("uname_release");
    p.uname_version = need("uname_version");
    p.uname_machine = need("uname_machine");
    p.busybox_banner = need("busybox_banner");

    auto need_asset = [&](const char* key) -> std::string {
        std::string name = need(key);
        if (name.empty()) return "";
        auto content = read_file(dir / name);
        if (!content) {
            errors.push_back(conf_path.string() + ": asset '" + name +
                             "' for key '" + key + "' not readable");
            return "";
        }
        return *content;
    };

    p.motd = need_asset("motd");
    p.applet_listing = need_asset("applets");
    p.free_output = need_asset("free_output");
    p.ps_output = need_asset("ps_output");
    p.applet_names = parse_applet_names(p.applet_listing);
    if (p.applet_names.empty())
        errors.push_back(conf_path.string() +
                         ": applet listing has no parsable function names");

    std::string filemap_text = need_asset("filemap");
    int fm_line = 0;
    for (const auto& raw : split(filemap_text, '\n')) {
        ++fm_line;
        std::string t = trim(raw);
        if (t.empty() || t[0] == '#') continue;
        auto bar = t.find('|');
        if (bar == std::string::npos) {
            errors.push_back(kv["filemap"] + ":" + std::to_string(fm_line) +
                             ": expected <path>|<description>");
            continue;
        }
        p.filemap[trim(t.substr(0, bar))] = trim(t.substr(bar + 1));
    }

    std::string manifest = need("fs_manifest");
    p.fs_manifest = dir / manifest;
    if (!manifest.empty() && !std::filesystem::exists(p.fs_manifest))
        errors.push_back(conf_path.string() + ": fs_manifest '" + manifest +
                         "' not found");

    std::string mtime = need("fs_mtime");
    if (!mtime.empty()) {
        auto ms = parse_rfc3339_ms(mtime);
        if (!ms)
            errors.push_back(conf_path.string() +
                             ": fs_mtime is not an RFC 3339 timestamp");
        else
            p.fs_mtime_ms = *ms;
    }

    if (!errors.empty()) return std::nullopt;
    return p;
}

}  // namespace apiary
