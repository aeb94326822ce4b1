#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "clock.h"

namespace apiary {

enum class ReputationSource {
    virustotal_like,
    dshield_like,
    abuseipdb_like,
    offline,
};

std::string_view reputation_source_name(ReputationSource s);
std::optional<ReputationSource> reputation_source_from_name(
    std::string_view name);

struct ReputationVerdict {
    std::string subject;  // sha256 or IP
    ReputationSource source = ReputationSource::offline;
    std::optional<bool> malicious;  // absent when the provider was silent
    std::string family;             // provider threat label, may be empty
    std::string raw;                // response excerpt for the report
    std::int64_t fetched_at_ms = 0;
};

struct ProviderConfig {
    ReputationSource kind = ReputationSource::offline;
    std::string base_url;  // http://host[:port]
    std::string api_key;
    std::string cache_dir;
    std::int64_t ttl_ms = 7LL * 24 * 3600 * 1000;
    bool offline = false;  // answer from cache only, never the network
    int timeout_ms = 3000;
};

// One lookup contract over provider-specific adapters. Wire shapes:
//   virustotal_like: GET /api/v3/files/<subject>, header x-apikey;
//     malicious = data.attributes.last_analysis_stats.malicious > 0,
//     family = data.attributes.popular_threat_classification
//                  .suggested_threat_label
//   dshield_like:    GET /api/ip/<subject>?json;
//     malicious = ip.attacks > 0, family = ip.threatfeeds
//   abuseipdb_like:  GET /api/v2/check?ipAddress=<subject>, header Key;
//     malicious = data.abuseConfidenceScore >= 50
// Verdicts are cached on disk per subject; a fresh cache entry is served
// without a network call. Failures degrade to source=offline with absent
// malicious and are never cached, so an outage cannot poison the cache.
class ReputationClient {
public:
    ReputationClient(ProviderConfig cfg, Clock& clock);

    ReputationVerdict lookup(const std::string& subject);

    std::int64_t network_calls() const { return network_calls_; }

private:
    std::string cache_path(const std::string& subject) const;
    std::optional<ReputationVerdict> read_cache(const std::string& subject);
    void write_cache(const ReputationVerdict& verdict);
    ReputationVerdict fetch(const std::string& subject);

    ProviderConfig cfg_;
    Clock& clock_;
    std::int64_t network_calls_ = 0;
};

}  // namespace apiary
