#include "artifact_store.h"

#include <fstream>
#include <sstream>

#include "util.h"

namespace apiary {

ArtifactStore::ArtifactStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

StoredArtifact ArtifactStore::put(std::string_view data) {
    StoredArtifact out;
    out.sha256 = sha256_hex(data);
    out.relative_path = out.sha256;
    out.size_bytes = static_cast<std::int64_t>(data.size());

    std::lock_guard<std::mutex> lock(mu_);
    std::filesystem::path target = dir_ / out.relative_path;
    if (std::filesystem::exists(target)) {
        out.already_present = true;
        return out;
    }
    // write-then-rename so a concurrent reader never sees a partial file
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        f.write(data.data(), static_cast<std::streamsize>(data.size()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    return out;
}

std::optional<std::string> ArtifactStore::read(
    const std::string& relative_path) const {
    std::ifstream f(dir_ / relative_path, std::ios::binary);
    if (!f) return std::nullopt;
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace apiary
