#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apiary {

// SHA-256 of arbitrary bytes, lowercase hex.
std::string sha256_hex(std::string_view data);
// MD5, lowercase hex (md5sum emulation only, not integrity).
std::string md5_hex(std::string_view data);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
bool contains(std::string_view haystack, std::string_view needle);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);

// Escapes every byte outside printable ASCII (plus backslash itself) as \xNN.
// Output contains only bytes 0x20..0x7e, so it is always valid UTF-8 and
// never carries a raw newline. Lossless: \x5c marks the escape character.
std::string sanitize_capture(std::string_view raw);

std::string base64_encode(std::string_view data);
std::optional<std::string> base64_decode(std::string_view text);

// "env:NAME" is replaced by the value of $NAME (empty if unset);
// anything else passes through unchanged.
std::string expand_env_ref(const std::string& value);

std::string format_size_bar(std::string_view name, std::int64_t bytes);

}  // namespace apiary
