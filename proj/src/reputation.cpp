#include "reputation.h"

#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "util.h"

namespace apiary {

std::string_view reputation_source_name(ReputationSource s) {
    switch (s) {
        case ReputationSource::virustotal_like: return "virustotal_like";
        case ReputationSource::dshield_like: return "dshield_like";
        case ReputationSource::abuseipdb_like: return "abuseipdb_like";
        case ReputationSource::offline: return "offline";
    }
    return "offline";
}

std::optional<ReputationSource> reputation_source_from_name(
    std::string_view name) {
    if (name == "virustotal_like") return ReputationSource::virustotal_like;
    if (name == "dshield_like") return ReputationSource::dshield_like;
    if (name == "abuseipdb_like") return ReputationSource::abuseipdb_like;
    if (name == "offline") return ReputationSource::offline;
    return std::nullopt;
}

ReputationClient::ReputationClient(ProviderConfig cfg, Clock& clock)
    : cfg_(std::move(cfg)), clock_(clock) {
    if (!cfg_.cache_dir.empty())
        std::filesystem::create_directories(cfg_.cache_dir);
}

std::string ReputationClient::cache_path(const std::string& subject) const {
    // content-addressed name keeps hostile subjects out of the filesystem
    return (std::filesystem::path(cfg_.cache_dir) /
            (sha256_hex(subject).substr(0, 32) + ".json"))
        .string();
}

std::optional<ReputationVerdict> ReputationClient::read_cache(
    const std::string& subject) {
    if (cfg_.cache_dir.empty()) return std::nullopt;
    std::ifstream in(cache_path(subject), std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    ReputationVerdict v;
    v.subject = doc.value("subject", std::string());
    if (v.subject != subject) return std::nullopt;
    auto source = reputation_source_from_name(
        doc.value("source", std::string("offline")));
    v.source = source.value_or(ReputationSource::offline);
    if (doc.contains("malicious") && doc["malicious"].is_boolean())
        v.malicious = doc["malicious"].get<bool>();
    v.family = doc.value("family", std::string());
    v.raw = doc.value("raw", std::string());
    v.fetched_at_ms = doc.value("fetched_at", std::int64_t{0});
    return v;
}

void ReputationClient::write_cache(const ReputationVerdict& verdict) {
    if (cfg_.cache_dir.empty()) return;
    nlohmann::ordered_json doc;
    doc["subject"] = verdict.subject;
    doc["source"] = std::string(reputation_source_name(verdict.source));
    if (verdict.malicious)
        doc["malicious"] = *verdict.malicious;
    else
        doc["malicious"] = nullptr;
    doc["family"] = verdict.family;
    doc["raw"] = verdict.raw;
    doc["fetched_at"] = verdict.fetched_at_ms;
    std::ofstream out(cache_path(verdict.subject),
                      std::ios::binary | std::ios::trunc);
    out << doc.dump() << "\n";
}

namespace {

struct Endpoint {
    std::string host;
    int port = 80;
};

std::optional<Endpoint> parse_base_url(const std::string& base_url) {
    std::string rest = base_url;
    if (starts_with(rest, "http://")) rest = rest.substr(7);
    if (rest.empty() || contains(rest, "/")) return std::nullopt;
    Endpoint out;
    auto colon = rest.rfind(':');
    if (colon == std::string::npos) {
        out.host = rest;
    } else {
        out.host = rest.substr(0, colon);
        out.port = std::atoi(rest.substr(colon + 1).c_str());
    }
    if (out.host.empty() || out.port <= 0 || out.port > 65535)
        return std::nullopt;
    return out;
}

std::string excerpt(const std::string& body) {
    std::string out = body;
    if (out.size() > 512) out.resize(512);
    return sanitize_capture(out);
}

}  // namespace

ReputationVerdict ReputationClient::fetch(const std::string& subject) {
    ReputationVerdict v;
    v.subject = subject;
    v.source = ReputationSource::offline;
    v.fetched_at_ms = clock_.now_ms();

    auto endpoint = parse_base_url(cfg_.base_url);
    if (!endpoint) {
        v.raw = "bad base_url";
        return v;
    }

    httplib::Client client(endpoint->host, endpoint->port);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(0, cfg_.timeout_ms * 1000);

    httplib::Headers headers;
    std::string path;
    switch (cfg_.kind) {
        case ReputationSource::virustotal_like:
            path = "/api/v3/files/" + subject;
            headers.emplace("x-apikey", cfg_.api_key);
            break;
        case ReputationSource::dshield_like:
            path = "/api/ip/" + subject + "?json";
            break;
        case ReputationSource::abuseipdb_like:
            path = "/api/v2/check?ipAddress=" + subject;
            headers.emplace("Key", cfg_.api_key);
            break;
        case ReputationSource::offline:
            return v;
    }

    ++network_calls_;
    auto res = client.Get(path, headers);
    if (!res || res->status < 200 || res->status >= 300) {
        v.raw = res ? "provider status " + std::to_string(res->status)
                    : "provider unreachable";
        return v;
    }

    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) {
        v.raw = "unparseable provider payload";
        return v;
    }

    v.source = cfg_.kind;
    v.raw = excerpt(res->body);
    try {
        switch (cfg_.kind) {
            case ReputationSource::virustotal_like: {
                const auto& attrs = doc.at("data").at("attributes");
                if (attrs.contains("last_analysis_stats"))
                    v.malicious =
                        attrs["last_analysis_stats"].value("malicious", 0) > 0;
                if (attrs.contains("popular_threat_classification"))
                    v.family = attrs["popular_threat_classification"].value(
                        "suggested_threat_label", std::string());
                break;
            }
            case ReputationSource::dshield_like: {
                const auto& ip = doc.at("ip");
                v.malicious = ip.value("attacks", 0) > 0;
                v.family = ip.value("threatfeeds", std::string());
                break;
            }
            case ReputationSource::abuseipdb_like: {
                const auto& data = doc.at("data");
                v.malicious = data.value("abuseConfidenceScore", 0) >= 50;
                v.family = data.value("usageType", std::string());
                break;
            }
            case ReputationSource::offline:
                break;
        }
    } catch (const nlohmann::json::exception&) {
        // provider answered 2xx with an unexpected shape: keep the excerpt,
        // leave malicious absent
        v.malicious.reset();
    }
    return v;
}

ReputationVerdict ReputationClient::lookup(const std::string& subject) {
    if (auto cached = read_cache(subject)) {
        std::int64_t age = clock_.now_ms() - cached->fetched_at_ms;
        if (age >= 0 && age <= cfg_.ttl_ms) return *cached;
    }
    if (cfg_.offline || cfg_.kind == ReputationSource::offline) {
        ReputationVerdict v;
        v.subject = subject;
        v.source = ReputationSource::offline;
        v.fetched_at_ms = clock_.now_ms();
        return v;
    }
    ReputationVerdict v = fetch(subject);
    if (v.source != ReputationSource::offline) write_cache(v);
    return v;
}

}  // namespace apiary
