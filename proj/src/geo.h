#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace apiary {

// One CIDR row: family-tagged address bytes plus prefix length.
struct GeoPrefix {
    std::array<std::uint8_t, 16> addr{};
    int bits = 0;        // prefix length
    bool v6 = false;     // v4 addresses use the first 4 bytes
    std::string country;
};

// Offline longest-prefix-match table mapping source addresses to country
// codes. Rows come from a CSV of `prefix,country`; overlapping prefixes are
// fine, the longest one wins.
class GeoTable {
public:
    // '#' comments and blank lines skipped; malformed rows are load errors
    // (line-anchored), and any error fails the load.
    static std::optional<GeoTable> parse(const std::string& text,
                                         std::vector<std::string>& errors);
    static std::optional<GeoTable> load_file(const std::string& path,
                                             std::vector<std::string>& errors);

    // country of the longest matching prefix; nullopt when nothing matches
    // or the address does not parse
    std::optional<std::string> match(const std::string& addr) const;

    std::size_t size() const { return rows_.size(); }

private:
    std::vector<GeoPrefix> rows_;
};

}  // namespace apiary
