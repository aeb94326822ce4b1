#include "httpmsg.h"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "util.h"

namespace apiary {

std::optional<std::string> HttpRequest::header(std::string_view name) const {
    for (const auto& [k, v] : headers)
        if (iequals(k, name)) return v;
    return std::nullopt;
}

std::string HttpRequest::path() const {
    auto q = target.find('?');
    return q == std::string::npos ? target : target.substr(0, q);
}

std::string HttpRequest::query() const {
    auto q = target.find('?');
    return q == std::string::npos ? std::string() : target.substr(q + 1);
}

namespace {

bool valid_method_token(const std::string& m) {
    if (m.empty() || m.size() > 32) return false;
    for (char c : m)
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '-' &&
            c != '_')
            return false;
    return true;
}

}  // namespace

HttpParseResult read_http_request(LineReader& reader,
                                  std::int64_t max_body_bytes) {
    HttpParseResult result;

    std::optional<std::string> line = reader.read_line();
    // skip at most a few stray blank lines before the request line
    for (int blank = 0; line && line->empty() && blank < 4; ++blank)
        line = reader.read_line();
    if (!line) {
        result.status = HttpParseStatus::closed;
        return result;
    }
    result.raw_prefix = *line;

    // METHOD SP TARGET SP VERSION (version optional for 0.9-style junk)
    auto sp1 = line->find(' ');
    if (sp1 == std::string::npos || sp1 == 0) {
        result.status = HttpParseStatus::malformed;
        result.message = "missing method separator";
        return result;
    }
    std::string method = line->substr(0, sp1);
    auto sp2 = line->find(' ', sp1 + 1);
    std::string target, version;
    if (sp2 == std::string::npos) {
        target = line->substr(sp1 + 1);
    } else {
        target = line->substr(sp1 + 1, sp2 - sp1 - 1);
        version = line->substr(sp2 + 1);
    }
    if (!valid_method_token(method) || target.empty() ||
        target.find(' ') != std::string::npos) {
        result.status = HttpParseStatus::malformed;
        result.message = "bad request line";
        return result;
    }
    if (!version.empty() && !starts_with(version, "HTTP/")) {
        result.status = HttpParseStatus::malformed;
        result.message = "bad protocol version";
        return result;
    }

    result.request.method = method;
    result.request.target = target;
    result.request.version = version.empty() ? "HTTP/1.0" : version;

    // headers until blank line; tolerant of whitespace around the colon
    std::int64_t content_length = 0;
    int header_count = 0;
    for (;;) {
        auto h = reader.read_line();
        if (!h) {
            result.status = HttpParseStatus::malformed;
            result.message = "connection closed inside headers";
            return result;
        }
        if (h->empty()) break;
        result.raw_prefix += "\n" + *h;
        if (++header_count > 200) {
            result.status = HttpParseStatus::malformed;
            result.message = "too many headers";
            return result;
        }
        auto colon = h->find(':');
        if (colon == std::string::npos || colon == 0) {
            result.status = HttpParseStatus::malformed;
            result.message = "header line without name";
            return result;
        }
        std::string name = trim(h->substr(0, colon));
        std::string value = trim(h->substr(colon + 1));
        if (name.empty() || name.find(' ') != std::string::npos) {
            result.status = HttpParseStatus::malformed;
            result.message = "bad header name";
            return result;
        }
        result.request.headers.emplace_back(name, value);
        if (iequals(name, "Content-Length")) {
            char* end = nullptr;
            long long v = std::strtoll(value.c_str(), &end, 10);
            if (end == value.c_str() || *end != '\0' || v < 0) {
                result.status = HttpParseStatus::malformed;
                result.message = "unparseable Content-Length";
                return result;
            }
            content_length = v;
        }
    }

    if (content_length == 0) {
        result.status = HttpParseStatus::ok;
        return result;
    }

    // consume exactly content_length bytes off the wire (leaving pipelined
    // requests in the reader) but keep at most the cap in memory
    std::int64_t want = std::min(content_length, max_body_bytes);
    std::string body =
        reader.take_buffered(static_cast<std::size_t>(content_length));
    std::int64_t consumed = static_cast<std::int64_t>(body.size());
    if (static_cast<std::int64_t>(body.size()) > want)
        body.resize(static_cast<std::size_t>(want));
    char buf[8192];
    while (consumed < content_length) {
        std::size_t chunk = static_cast<std::size_t>(
            std::min<std::int64_t>(sizeof(buf), content_length - consumed));
        int n = reader.stream().read_some(buf, chunk);
        if (n <= 0) break;
        consumed += n;
        std::int64_t room = want - static_cast<std::int64_t>(body.size());
        if (room > 0)
            body.append(buf, static_cast<std::size_t>(
                                 std::min<std::int64_t>(room, n)));
    }
    result.request.body = std::move(body);

    if (content_length > max_body_bytes) {
        result.status = HttpParseStatus::body_too_large;
        result.message = "body exceeds cap";
        return result;
    }

    result.status = HttpParseStatus::ok;
    return result;
}

std::string_view http_status_reason(int status) {
    switch (status) {
        case 200: return "OK";
        case 204: return "No Content";
        case 301: return "Moved Permanently";
        case 302: return "Found";
        case 400: return "Bad Request";
        case 401: return "Unauthorized";
        case 403: return "Forbidden";
        case 404: return "Not Found";
        case 405: return "Method Not Allowed";
        case 413: return "Request Entity Too Large";
        case 500: return "Internal Server Error";
        case 501: return "Not Implemented";
        default: return "Unknown";
    }
}

std::string render_http_response_head(const HttpResponse& resp) {
    std::string out = "HTTP/1.1 " + std::to_string(resp.status) + " " +
                      std::string(http_status_reason(resp.status)) + "\r\n";
    bool have_length = false;
    for (const auto& [k, v] : resp.headers) {
        out += k + ": " + v + "\r\n";
        if (iequals(k, "Content-Length")) have_length = true;
    }
    if (!resp.suppress_length && !have_length)
        out += "Content-Length: " + std::to_string(resp.body.size()) + "\r\n";
    out += "\r\n";
    return out;
}

bool write_http_response(ByteStream& out, const HttpResponse& resp) {
    std::string head = render_http_response_head(resp);
    if (!out.write_all(head)) return false;
    if (resp.body.empty()) return true;
    return out.write_all(resp.body);
}

std::string url_decode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '+') {
            out.push_back(' ');
        } else if (c == '%' && i + 2 < text.size() &&
                   std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
                   std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
            auto nibble = [](char h) {
                return std::isdigit(static_cast<unsigned char>(h))
                           ? h - '0'
                           : std::tolower(static_cast<unsigned char>(h)) -
                                 'a' + 10;
            };
            out.push_back(static_cast<char>(nibble(text[i + 1]) * 16 +
                                            nibble(text[i + 2])));
            i += 2;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_query(
    std::string_view query) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t pos = 0;
    while (pos <= query.size()) {
        auto amp = query.find('&', pos);
        std::string_view pair = query.substr(
            pos, amp == std::string_view::npos ? std::string_view::npos
                                               : amp - pos);
        if (!pair.empty()) {
            auto eq = pair.find('=');
            if (eq == std::string_view::npos)
                out.emplace_back(url_decode(pair), "");
            else
                out.emplace_back(url_decode(pair.substr(0, eq)),
                                 url_decode(pair.substr(eq + 1)));
        }
        if (amp == std::string_view::npos) break;
        pos = amp + 1;
    }
    return out;
}

std::optional<std::string> query_param(std::string_view query,
                                       std::string_view name) {
    for (const auto& [k, v] : parse_query(query))
        if (k == name) return v;
    return std::nullopt;
}

std::string http_date(std::int64_t unix_ms) {
    time_t secs = static_cast<time_t>(unix_ms / 1000);
    tm g{};
    gmtime_r(&secs, &g);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%a, %d %b %Y %H:%M:%S GMT", &g);
    return buf;
}

}  // namespace apiary
