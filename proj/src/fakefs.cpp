#include "fakefs.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "util.h"

namespace apiary {

namespace {

std::vector<std::string> path_components(const std::string& abs_path) {
    std::vector<std::string> out;
    for (const auto& c : split(abs_path, '/'))
        if (!c.empty()) out.push_back(c);
    return out;
}

// deterministic pseudo-binary with an ELF magic, so content sniffing and
// size checks behave like a real stripped executable
std::string make_elf_blob(const std::string& seed, std::int64_t size) {
    std::string out;
    out.reserve(static_cast<std::size_t>(size));
    out.append("\x7f"
               "ELF\x01\x01\x01\x00",
               8);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : seed) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    while (out.size() < static_cast<std::size_t>(size)) {
        h ^= h << 13;
        h ^= h >> 7;
        h ^= h << 17;
        out.push_back(static_cast<char>(h & 0xff));
    }
    out.resize(static_cast<std::size_t>(size));
    return out;
}

std::string generate(const std::string& id, const GenContext& ctx) {
    if (!ctx.profile || !ctx.clock) return "";
    if (id == "uptime") {
        double up =
            static_cast<double>(ctx.clock->now_ms() - ctx.boot_ms) / 1000.0;
        if (up < 0) up = 0;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f %.2f\n", up, up * 0.93);
        return buf;
    }
    if (id == "version") {
        return "Linux version " + ctx.profile->uname_release + " (root@" +
               ctx.profile->hostname + ") (gcc version 4.8.3 (GCC)) " +
               ctx.profile->uname_version + "\n";
    }
    if (id == "loadavg") {
        double up =
            static_cast<double>(ctx.clock->now_ms() - ctx.boot_ms) / 1000.0;
        int running = 1 + static_cast<int>(up) % 3;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%.2f %.2f %.2f %d/46 %d\n", 0.12,
                      0.08, 0.05, running, 300 + static_cast<int>(up) % 500);
        return buf;
    }
    return "";
}

}  // namespace

std::string FakeFilesystem::normalize(const std::string& cwd,
                                      const std::string& path) {
    std::string start = path.empty() || path[0] != '/' ? cwd : "/";
    std::vector<std::string> stack = path_components(start);
    for (const auto& c : path_components(path)) {
        if (c == ".") continue;
        if (c == "..") {
            if (!stack.empty()) stack.pop_back();
            continue;
        }
        stack.push_back(c);
    }
    if (stack.empty()) return "/";
    std::string out;
    for (const auto& c : stack) out += "/" + c;
    return out;
}

std::optional<FakeFilesystem> FakeFilesystem::build(
    const DeviceProfile& profile, std::vector<std::string>& errors) {
    FakeFilesystem fs;
    fs.profile_ = &profile;
    fs.root_.name = "/";
    fs.root_.type = FsNodeType::dir;
    fs.root_.mode = 0755;
    fs.root_.mtime_ms = profile.fs_mtime_ms;

    std::ifstream in(profile.fs_manifest);
    if (!in) {
        errors.push_back("cannot open fs manifest " +
                         profile.fs_manifest.string());
        return std::nullopt;
    }

    auto ensure_dir = [&](const std::string& abs) -> FsNode* {
        FsNode* cur = &fs.root_;
        for (const auto& c : path_components(abs)) {
            auto it = cur->children.find(c);
            if (it == cur->children.end()) {
                FsNode d;
                d.name = c;
                d.type = FsNodeType::dir;
                d.mode = 0755;
                d.mtime_ms = profile.fs_mtime_ms;
                it = cur->children.emplace(c, std::move(d)).first;
            }
            cur = &it->second;
        }
        return cur;
    };

    std::string line;
    int lineno = 0;
    bool bad = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        std::string type, path;
        ss >> type >> path;
        auto err = [&](const std::string& msg) {
            errors.push_back(profile.fs_manifest.string() + ":" +
                             std::to_string(lineno) + ": " + msg);
            bad = true;
        };
        if (path.empty() || path[0] != '/') {
            err("path must be absolute");
            continue;
        }
        std::string abs = normalize("/", path);

        if (type == "dir") {
            std::string mode, owner;
            ss >> mode >> owner;
            FsNode* n = ensure_dir(abs);
            if (!mode.empty()) n->mode = static_cast<int>(strtol(mode.c_str(), nullptr, 8));
            if (!owner.empty()) n->owner = owner;
        } else if (type == "file" || type == "symlink") {
            auto slash = abs.find_last_of('/');
            std::string parent = slash == 0 ? "/" : abs.substr(0, slash);
            std::string name = abs.substr(slash + 1);
            FsNode* pn = ensure_dir(parent);
            FsNode n;
            n.name = name;
            n.mtime_ms = profile.fs_mtime_ms;
            if (type == "symlink") {
                std::string target;
                ss >> target;
                if (target.empty()) {
                    err("symlink needs a target");
                    continue;
                }
                n.type = FsNodeType::symlink;
                n.mode = 0777;
                n.symlink_target = target;
                n.size = static_cast<std::int64_t>(target.size());
            } else {
                std::string mode, owner, spec;
                ss >> mode >> owner >> spec;
                n.type = FsNodeType::file;
                n.mode = mode.empty()
                             ? 0644
                             : static_cast<int>(strtol(mode.c_str(), nullptr, 8));
                if (!owner.empty()) n.owner = owner;
                n.content_spec = spec;
                if (starts_with(spec, "asset:")) {
                    auto content = profile.read_asset(spec.substr(6));
                    if (!content) {
                        err("asset '" + spec.substr(6) + "' not readable");
                        continue;
                    }
                    n.size = static_cast<std::int64_t>(content->size());
                } else if (starts_with(spec, "elf:")) {
                    n.size = strtoll(spec.c_str() + 4, nullptr, 10);
                    if (n.size < 8) {
                        err("elf size must be at least 8");
                        continue;
                    }
                } else if (starts_with(spec, "gen:")) {
                    n.size = 0;  // proc-style: size not meaningful
                } else if (!spec.empty()) {
                    err("unknown content spec '" + spec + "'");
                    continue;
                }
            }
            pn->children[name] = std::move(n);
        } else {
            err("unknown node type '" + type + "'");
        }
    }
    if (bad) return std::nullopt;
    return fs;
}

const FsNode* FakeFilesystem::lookup_depth(const std::string& abs_path,
                                           int depth) const {
    if (depth > 8) return nullptr;
    const FsNode* cur = &root_;
    auto comps = path_components(abs_path);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (cur->type == FsNodeType::symlink)
            cur = lookup_depth(cur->symlink_target, depth + 1);
        if (!cur || cur->type != FsNodeType::dir) return nullptr;
        auto it = cur->children.find(comps[i]);
        if (it == cur->children.end()) return nullptr;
        cur = &it->second;
    }
    if (cur->type == FsNodeType::symlink)
        return lookup_depth(cur->symlink_target, depth + 1);
    return cur;
}

const FsNode* FakeFilesystem::lookup(const std::string& abs_path) const {
    return lookup_depth(abs_path, 0);
}

const FsNode* FakeFilesystem::lookup_entry(const std::string& abs_path) const {
    auto comps = path_components(abs_path);
    if (comps.empty()) return &root_;
    std::string parent = "/";
    for (std::size_t i = 0; i + 1 < comps.size(); ++i)
        parent += (i ? "/" : "") + comps[i];
    const FsNode* pn = lookup(parent);
    if (!pn || pn->type != FsNodeType::dir) return nullptr;
    auto it = pn->children.find(comps.back());
    return it == pn->children.end() ? nullptr : &it->second;
}

const FsNode* FakeFilesystem::resolve(const std::string& cwd,
                                      const std::string& path) const {
    return lookup(normalize(cwd, path));
}

std::string FakeFilesystem::read_content(const FsNode& node,
                                         const GenContext& ctx) const {
    const std::string& spec = node.content_spec;
    if (spec.empty()) return "";
    if (starts_with(spec, "asset:")) {
        auto content = profile_ ? profile_->read_asset(spec.substr(6))
                                : std::nullopt;
        return content.value_or("");
    }
    if (starts_with(spec, "gen:")) return generate(spec.substr(4), ctx);
    if (starts_with(spec, "elf:")) return make_elf_blob(node.name, node.size);
    return "";
}

std::optional<NodeView> SessionFs::stat(const std::string& abs_path) const {
    if (overlay_.deleted.count(abs_path)) return std::nullopt;
    auto fit = overlay_.files.find(abs_path);
    if (fit != overlay_.files.end()) {
        NodeView v;
        v.type = FsNodeType::file;
        v.mode = 0644;
        v.size = static_cast<std::int64_t>(fit->second.content.size());
        v.mtime_ms = fit->second.mtime_ms;
        v.from_overlay = true;
        return v;
    }
    if (overlay_.dirs.count(abs_path)) {
        NodeView v;
        v.type = FsNodeType::dir;
        v.mode = 0755;
        v.mtime_ms = 0;
        v.from_overlay = true;
        return v;
    }
    const FsNode* n = base_.lookup(abs_path);
    if (!n) return std::nullopt;
    NodeView v;
    v.type = n->type;
    v.mode = n->mode;
    v.owner = n->owner;
    v.size = n->size;
    v.mtime_ms = n->mtime_ms;
    v.symlink_target = n->symlink_target;
    return v;
}

std::optional<NodeView> SessionFs::lstat(const std::string& abs_path) const {
    if (overlay_.deleted.count(abs_path)) return std::nullopt;
    if (overlay_.files.count(abs_path) || overlay_.dirs.count(abs_path))
        return stat(abs_path);
    const FsNode* n = base_.lookup_entry(abs_path);
    if (!n) return std::nullopt;
    NodeView v;
    v.type = n->type;
    v.mode = n->mode;
    v.owner = n->owner;
    v.size = n->size;
    v.mtime_ms = n->mtime_ms;
    v.symlink_target = n->symlink_target;
    return v;
}

std::optional<std::string> SessionFs::read(const std::string& abs_path) const {
    if (overlay_.deleted.count(abs_path)) return std::nullopt;
    auto fit = overlay_.files.find(abs_path);
    if (fit != overlay_.files.end()) return fit->second.content;
    const FsNode* n = base_.lookup(abs_path);
    if (!n || n->type != FsNodeType::file) return std::nullopt;
    return base_.read_content(*n, ctx_);
}

bool SessionFs::write(const std::string& abs_path, const std::string& content,
                      bool append) {
    if (abs_path == "/") return false;
    auto slash = abs_path.find_last_of('/');
    std::string parent = slash == 0 ? "/" : abs_path.substr(0, slash);
    auto pv = stat(parent);
    if (!pv || pv->type != FsNodeType::dir) return false;
    auto existing = stat(abs_path);
    if (existing && existing->type == FsNodeType::dir) return false;

    std::string prior;
    if (append) {
        auto cur = read(abs_path);
        if (cur) prior = *cur;
    }
    overlay_.deleted.erase(abs_path);
    overlay_.files[abs_path] = {prior + content,
                                ctx_.clock ? ctx_.clock->now_ms() : 0};
    return true;
}

bool SessionFs::remove(const std::string& abs_path) {
    auto v = stat(abs_path);
    if (!v) return false;
    overlay_.files.erase(abs_path);
    overlay_.dirs.erase(abs_path);
    overlay_.deleted.insert(abs_path);
    return true;
}

bool SessionFs::mkdir(const std::string& abs_path) {
    if (stat(abs_path)) return false;
    auto slash = abs_path.find_last_of('/');
    std::string parent = slash == 0 ? "/" : abs_path.substr(0, slash);
    auto pv = stat(parent);
    if (!pv || pv->type != FsNodeType::dir) return false;
    overlay_.deleted.erase(abs_path);
    overlay_.dirs.insert(abs_path);
    return true;
}

std::optional<std::vector<DirEntry>> SessionFs::list(
    const std::string& abs_path) const {
    auto v = stat(abs_path);
    if (!v || v->type != FsNodeType::dir) return std::nullopt;

    std::map<std::string, NodeView> merged;
    const FsNode* n = base_.lookup(abs_path);
    if (n && n->type == FsNodeType::dir) {
        for (const auto& [name, child] : n->children) {
            NodeView cv;
            cv.type = child.type;
            cv.mode = child.mode;
            cv.owner = child.owner;
            cv.size = child.size;
            cv.mtime_ms = child.mtime_ms;
            cv.symlink_target = child.symlink_target;
            merged[name] = cv;
        }
    }
    std::string prefix = abs_path == "/" ? "/" : abs_path + "/";
    auto direct_child = [&](const std::string& p) -> std::optional<std::string> {
        if (!starts_with(p, prefix)) return std::nullopt;
        std::string rest = p.substr(prefix.size());
        if (rest.empty() || rest.find('/') != std::string::npos)
            return std::nullopt;
        return rest;
    };
    for (const auto& [p, f] : overlay_.files) {
        if (auto name = direct_child(p)) {
            NodeView cv;
            cv.type = FsNodeType::file;
            cv.mode = 0644;
            cv.size = static_cast<std::int64_t>(f.content.size());
            cv.mtime_ms = f.mtime_ms;
            cv.from_overlay = true;
            merged[*name] = cv;
        }
    }
    for (const auto& p : overlay_.dirs) {
        if (auto name = direct_child(p)) {
            NodeView cv;
            cv.type = FsNodeType::dir;
            cv.mode = 0755;
            cv.from_overlay = true;
            merged[*name] = cv;
        }
    }
    for (const auto& p : overlay_.deleted) {
        if (auto name = direct_child(p)) merged.erase(*name);
    }

    std::vector<DirEntry> out;
    out.reserve(merged.size());
    for (auto& [name, view] : merged) out.push_back({name, view});
    return out;
}

}  // namespace apiary
