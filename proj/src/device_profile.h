#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace apiary {

// Identity of the emulated device: strings and text assets the shell serves.
// Everything here is operator data loaded from a profile directory; code
// never hard-codes device responses.
struct DeviceProfile {
    std::filesystem::path dir;

    std::string hostname;
    std::string ssh_banner;
    std::string uname_sysname;
    std::string uname_release;
    std::string uname_version;
    std::string uname_machine;
    std::string busybox_banner;  // first line of bare `busybox` output

    std::string motd;            // printed after successful login
    std::string applet_listing;  // full bare `busybox` output
    std::set<std::string> applet_names;
    std::string free_output;     // canned `free` response
    std::string ps_output;       // canned `ps` response

    // path -> `file` command description
    std::map<std::string, std::string> filemap;

    std::filesystem::path fs_manifest;
    std::int64_t fs_mtime_ms = 0;

    std::string uname_line() const;  // `uname -a` output without newline

    std::optional<std::string> read_asset(const std::string& name) const;

    static std::optional<DeviceProfile> load(const std::filesystem::path& dir,
                                             std::vector<std::string>& errors);
};

}  // namespace apiary
