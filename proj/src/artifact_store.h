#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace apiary {

struct StoredArtifact {
    std::string sha256;
    std::string relative_path;  // file name inside the store
    std::int64_t size_bytes = 0;
    bool already_present = false;
};

// Content-addressed directory of captured payloads, keyed by sha256.
// Writes are idempotent: storing the same bytes twice keeps one file.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path dir);

    StoredArtifact put(std::string_view data);
    std::optional<std::string> read(const std::string& relative_path) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex mu_;
};

}  // namespace apiary
