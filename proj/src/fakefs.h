#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clock.h"
#include "device_profile.h"

namespace apiary {

enum class FsNodeType { file, dir, symlink };

struct FsNode {
    std::string name;
    FsNodeType type = FsNodeType::file;
    int mode = 0644;  // permission bits only
    std::string owner = "root";
    std::int64_t size = 0;
    std::int64_t mtime_ms = 0;
    // one of: "" (empty file), "asset:<name>", "gen:<id>", "elf:<size>"
    std::string content_spec;
    std::string symlink_target;
    std::map<std::string, FsNode> children;
};

// Everything a content generator may consult when a /proc-style file is read.
struct GenContext {
    const DeviceProfile* profile = nullptr;
    Clock* clock = nullptr;
    std::int64_t boot_ms = 0;
};

// Immutable baseline tree built from the profile's manifest. Sessions never
// mutate it; their writes land in a per-session FsOverlay.
class FakeFilesystem {
public:
    static std::optional<FakeFilesystem> build(const DeviceProfile& profile,
                                               std::vector<std::string>& errors);

    // absolute normalized path: handles ".", "..", duplicate slashes;
    // ".." above "/" stays at "/"
    static std::string normalize(const std::string& cwd,
                                 const std::string& path);

    // follows symlinks (bounded depth); nullptr when absent
    const FsNode* lookup(const std::string& abs_path) const;
    // like lookup but does not follow a symlink in the final component
    const FsNode* lookup_entry(const std::string& abs_path) const;
    // resolves a possibly-relative path first
    const FsNode* resolve(const std::string& cwd, const std::string& path) const;

    std::string read_content(const FsNode& node, const GenContext& ctx) const;

    const FsNode& root() const { return root_; }

private:
    const FsNode* lookup_depth(const std::string& abs_path, int depth) const;

    FsNode root_;
    const DeviceProfile* profile_ = nullptr;
};

// Per-session copy-on-write layer above the baseline.
class FsOverlay {
public:
    struct OverlayFile {
        std::string content;
        std::int64_t mtime_ms = 0;
    };

    std::map<std::string, OverlayFile> files;  // abs path -> replacement
    std::set<std::string> deleted;             // abs paths hidden this session
    std::set<std::string> dirs;                // dirs created this session
};

// What a shell command sees when it stats a path, baseline or overlay.
struct NodeView {
    FsNodeType type = FsNodeType::file;
    int mode = 0644;
    std::string owner = "root";
    std::int64_t size = 0;
    std::int64_t mtime_ms = 0;
    std::string symlink_target;  // set for symlinks
    bool from_overlay = false;
};

struct DirEntry {
    std::string name;
    NodeView view;
};

// Session-scoped filesystem facade combining baseline + overlay.
class SessionFs {
public:
    SessionFs(const FakeFilesystem& base, FsOverlay& overlay, GenContext ctx)
        : base_(base), overlay_(overlay), ctx_(ctx) {}

    std::string normalize(const std::string& cwd,
                          const std::string& path) const {
        return FakeFilesystem::normalize(cwd, path);
    }

    std::optional<NodeView> stat(const std::string& abs_path) const;
    // does not follow a final-component symlink (ls -l / file semantics)
    std::optional<NodeView> lstat(const std::string& abs_path) const;
    std::optional<std::string> read(const std::string& abs_path) const;
    // parent must exist and be a directory
    bool write(const std::string& abs_path, const std::string& content,
               bool append);
    bool remove(const std::string& abs_path);
    bool mkdir(const std::string& abs_path);
    // entries sorted by name; nullopt when not a directory
    std::optional<std::vector<DirEntry>> list(const std::string& abs_path) const;

private:
    const FakeFilesystem& base_;
    FsOverlay& overlay_;
    GenContext ctx_;
};

}  // namespace apiary
