#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "net.h"

namespace apiary {

struct HttpRequest {
    std::string method;
    std::string target;   // path + query exactly as sent
    std::string version;  // "HTTP/1.1"
    std::vector<std::pair<std::string, std::string>> headers;  // wire order
    std::string body;     // up to the configured cap

    // first matching header value, name compared case-insensitively
    std::optional<std::string> header(std::string_view name) const;
    std::string path() const;   // target up to '?'
    std::string query() const;  // after '?', empty if none
};

enum class HttpParseStatus {
    ok,
    closed,          // clean EOF before any bytes of a request
    malformed,       // bad request line / header framing
    body_too_large,  // Content-Length above the cap; prefix retained
};

struct HttpParseResult {
    HttpParseStatus status = HttpParseStatus::closed;
    HttpRequest request;     // valid on ok; partially filled otherwise
    std::string raw_prefix;  // bytes consumed, for malformed-request logging
    std::string message;
};

// Tolerant HTTP/1.x request reader: accepts bare-LF line endings, caps the
// body at max_body_bytes (the overflow is drained and discarded, the prefix
// kept for hashing). Unknown methods parse fine; policy belongs to callers.
HttpParseResult read_http_request(LineReader& reader,
                                  std::int64_t max_body_bytes);

struct HttpResponse {
    int status = 200;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    bool suppress_length = false;  // streaming responses frame themselves
};

std::string_view http_status_reason(int status);

// serializes status line + headers (+ Content-Length unless suppressed)
std::string render_http_response_head(const HttpResponse& resp);
bool write_http_response(ByteStream& out, const HttpResponse& resp);

// %XX decoding, '+' as space
std::string url_decode(std::string_view text);
// name=value pairs split on '&', both sides decoded, wire order kept
std::vector<std::pair<std::string, std::string>> parse_query(
    std::string_view query);
std::optional<std::string> query_param(std::string_view query,
                                       std::string_view name);

// RFC 7231 IMF-fixdate, e.g. "Sun, 17 Aug 2026 03:18:53 GMT"
std::string http_date(std::int64_t unix_ms);

}  // namespace apiary
