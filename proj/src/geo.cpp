#include "geo.h"

#include <arpa/inet.h>

#include <cstdlib>
#include <cstring>

#include <fstream>
#include <sstream>

#include "util.h"

namespace apiary {

namespace {

struct ParsedAddr {
    std::array<std::uint8_t, 16> bytes{};
    bool v6 = false;
};

std::optional<ParsedAddr> parse_addr(const std::string& text) {
    ParsedAddr out;
    in_addr v4{};
    if (inet_pton(AF_INET, text.c_str(), &v4) == 1) {
        std::memcpy(out.bytes.data(), &v4, 4);
        return out;
    }
    in6_addr v6{};
    if (inet_pton(AF_INET6, text.c_str(), &v6) == 1) {
        std::memcpy(out.bytes.data(), &v6, 16);
        out.v6 = true;
        return out;
    }
    return std::nullopt;
}

// true when the first `bits` bits of a and b agree
bool prefix_equal(const std::array<std::uint8_t, 16>& a,
                  const std::array<std::uint8_t, 16>& b, int bits) {
    int whole = bits / 8;
    for (int i = 0; i < whole; ++i)
        if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)])
            return false;
    int rest = bits % 8;
    if (rest == 0) return true;
    std::uint8_t mask = static_cast<std::uint8_t>(0xff << (8 - rest));
    return (a[static_cast<std::size_t>(whole)] & mask) ==
           (b[static_cast<std::size_t>(whole)] & mask);
}

}  // namespace

std::optional<GeoTable> GeoTable::parse(const std::string& text,
                                        std::vector<std::string>& errors) {
    GeoTable out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto comma = t.find(',');
        if (comma == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": expected prefix,country");
            continue;
        }
        std::string prefix = trim(t.substr(0, comma));
        std::string country = trim(t.substr(comma + 1));
        if (country.empty()) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": empty country code");
            continue;
        }
        auto slash = prefix.find('/');
        if (slash == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": prefix needs /bits");
            continue;
        }
        auto addr = parse_addr(prefix.substr(0, slash));
        if (!addr) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": unparseable address '" +
                             prefix.substr(0, slash) + "'");
            continue;
        }
        int max_bits = addr->v6 ? 128 : 32;
        std::string bits_text = prefix.substr(slash + 1);
        char* end = nullptr;
        long bits = std::strtol(bits_text.c_str(), &end, 10);
        if (bits_text.empty() || end == nullptr || *end != '\0' ||
            bits < 0 || bits > max_bits) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": bad prefix length");
            continue;
        }
        GeoPrefix row;
        row.addr = addr->bytes;
        row.bits = static_cast<int>(bits);
        row.v6 = addr->v6;
        row.country = country;
        out.rows_.push_back(std::move(row));
    }
    if (!errors.empty()) return std::nullopt;
    return out;
}

std::optional<GeoTable> GeoTable::load_file(
    const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open geo table: " + path);
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), errors);
}

std::optional<std::string> GeoTable::match(const std::string& addr) const {
    auto parsed = parse_addr(addr);
    if (!parsed) return std::nullopt;
    const GeoPrefix* best = nullptr;
    for (const auto& row : rows_) {
        if (row.v6 != parsed->v6) continue;
        if (best && row.bits <= best->bits) continue;
        if (prefix_equal(row.addr, parsed->bytes, row.bits)) best = &row;
    }
    if (!best) return std::nullopt;
    return best->country;
}

}  // namespace apiary
