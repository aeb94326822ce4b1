#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "event.h"

namespace apiary {

// One ingested session reconstructed from its envelopes. Counters are derived at
// finalize time; event_indices point into EventStore::events().
struct SessionSummary {
    std::string session_id;
    std::string honeypot_id;
    Protocol protocol = Protocol::telnet;
    std::string source_addr;
    int source_port = 0;
    std::optional<std::string> client_banner;
    std::int64_t first_ms = 0;
    std::int64_t last_ms = 0;
    bool has_open = false;
    bool has_close = false;
    std::int64_t bytes_served = 0;
    int auth_attempts = 0;
    int auth_successes = 0;
    int commands = 0;
    int downloads = 0;
    int http_requests = 0;
    int signature_hits = 0;
    std::vector<std::size_t> event_indices;
};

struct IngestSummary {
    std::int64_t lines = 0;
    std::int64_t parsed = 0;
    std::int64_t skipped = 0;     // malformed lines
    std::int64_t duplicates = 0;  // repeated (session_id, seq)
    std::vector<std::string> file_errors;
    bool empty_store = false;  // zero parsable lines overall

    void merge(const IngestSummary& other);
};

// Immutable-after-build queryable set of envelopes grouped into sessions.
// Canonical internal order (session_id, seq) makes every derived output a
// pure function of the ingested set, not of file order.
class EventStore {
public:
    static EventStore ingest(const std::vector<std::string>& paths,
                             IngestSummary& summary);

    // building blocks for ingest and for synthetic stores in tests
    void add(EventEnvelope env);  // drops (session_id, seq) duplicates
    void finalize();              // sorts and derives session records

    const std::vector<EventEnvelope>& events() const { return events_; }
    const std::vector<SessionSummary>& sessions() const { return sessions_; }
    const SessionSummary* session(const std::string& id) const;

    std::vector<const EventEnvelope*> by_kind(EventKind kind) const;
    std::vector<const SessionSummary*> by_honeypot(
        const std::string& honeypot_id) const;
    std::vector<const SessionSummary*> by_source(const std::string& addr) const;
    std::vector<const SessionSummary*> in_range(std::int64_t from_ms,
                                               std::int64_t to_ms) const;

    std::int64_t duplicate_count() const { return duplicates_; }

private:
    std::vector<EventEnvelope> events_;
    std::vector<SessionSummary> sessions_;
    std::map<std::string, std::map<std::uint64_t, bool>> seen_;
    std::map<std::string, std::size_t> session_index_;
    std::int64_t duplicates_ = 0;
};

}  // namespace apiary
