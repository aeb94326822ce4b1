#include "store.h"

#include <algorithm>
#include <fstream>

namespace apiary {

void IngestSummary::merge(const IngestSummary& other) {
    lines += other.lines;
    parsed += other.parsed;
    skipped += other.skipped;
    duplicates += other.duplicates;
    file_errors.insert(file_errors.end(), other.file_errors.begin(),
                       other.file_errors.end());
}

EventStore EventStore::ingest(const std::vector<std::string>& paths,
                              IngestSummary& summary) {
    EventStore store;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            summary.file_errors.push_back("cannot open " + path);
            continue;
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ++summary.lines;
            auto outcome = parse_envelope(line);
            if (!std::holds_alternative<EventEnvelope>(outcome)) {
                ++summary.skipped;
                continue;
            }
            ++summary.parsed;
            store.add(std::get<EventEnvelope>(std::move(outcome)));
        }
    }
    store.finalize();
    summary.duplicates = store.duplicates_;
    summary.empty_store = summary.parsed == 0;
    return store;
}

void EventStore::add(EventEnvelope env) {
    auto& seen_seqs = seen_[env.session_id];
    if (!seen_seqs.emplace(env.seq, true).second) {
        ++duplicates_;
        return;
    }
    events_.push_back(std::move(env));
}

void EventStore::finalize() {
    std::sort(events_.begin(), events_.end(),
              [](const EventEnvelope& a, const EventEnvelope& b) {
                  if (a.session_id != b.session_id)
                      return a.session_id < b.session_id;
                  return a.seq < b.seq;
              });

    sessions_.clear();
    session_index_.clear();
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const EventEnvelope& env = events_[i];
        auto [it, fresh] =
            session_index_.emplace(env.session_id, sessions_.size());
        if (fresh) {
            sessions_.emplace_back();
            sessions_.back().session_id = env.session_id;
            sessions_.back().first_ms = env.timestamp_ms;
            sessions_.back().last_ms = env.timestamp_ms;
        }
        SessionSummary& rec = sessions_[it->second];
        rec.first_ms = std::min(rec.first_ms, env.timestamp_ms);
        rec.last_ms = std::max(rec.last_ms, env.timestamp_ms);
        rec.event_indices.push_back(i);
        switch (env.kind) {
            case EventKind::session_open: {
                const auto& open = std::get<SessionOpen>(env.payload);
                rec.has_open = true;
                rec.honeypot_id = open.honeypot_id;
                rec.protocol = open.protocol;
                rec.source_addr = open.source_addr;
                rec.source_port = open.source_port;
                rec.client_banner = open.client_banner;
                break;
            }
            case EventKind::auth_attempt: {
                ++rec.auth_attempts;
                if (std::get<AuthAttempt>(env.payload).success)
                    ++rec.auth_successes;
                break;
            }
            case EventKind::command:
                ++rec.commands;
                break;
            case EventKind::download:
                ++rec.downloads;
                break;
            case EventKind::http_request:
                ++rec.http_requests;
                break;
            case EventKind::signature_hit:
                ++rec.signature_hits;
                break;
            case EventKind::firmware_upload:
                break;
            case EventKind::session_close:
                rec.has_close = true;
                rec.bytes_served =
                    std::get<SessionClose>(env.payload).bytes_served;
                break;
        }
    }

    // session order independent of envelope arrival: by first activity
    std::sort(sessions_.begin(), sessions_.end(),
              [](const SessionSummary& a, const SessionSummary& b) {
                  if (a.first_ms != b.first_ms) return a.first_ms < b.first_ms;
                  return a.session_id < b.session_id;
              });
    session_index_.clear();
    for (std::size_t i = 0; i < sessions_.size(); ++i)
        session_index_[sessions_[i].session_id] = i;
}

const SessionSummary* EventStore::session(const std::string& id) const {
    auto it = session_index_.find(id);
    return it == session_index_.end() ? nullptr : &sessions_[it->second];
}

std::vector<const EventEnvelope*> EventStore::by_kind(EventKind kind) const {
    std::vector<const EventEnvelope*> out;
    for (const auto& env : events_)
        if (env.kind == kind) out.push_back(&env);
    return out;
}

std::vector<const SessionSummary*> EventStore::by_honeypot(
    const std::string& honeypot_id) const {
    std::vector<const SessionSummary*> out;
    for (const auto& rec : sessions_)
        if (rec.honeypot_id == honeypot_id) out.push_back(&rec);
    return out;
}

std::vector<const SessionSummary*> EventStore::by_source(
    const std::string& addr) const {
    std::vector<const SessionSummary*> out;
    for (const auto& rec : sessions_)
        if (rec.source_addr == addr) out.push_back(&rec);
    return out;
}

std::vector<const SessionSummary*> EventStore::in_range(
    std::int64_t from_ms, std::int64_t to_ms) const {
    std::vector<const SessionSummary*> out;
    for (const auto& rec : sessions_)
        if (rec.first_ms >= from_ms && rec.first_ms < to_ms)
            out.push_back(&rec);
    return out;
}

}  // namespace apiary
