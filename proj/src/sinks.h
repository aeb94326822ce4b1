#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "clock.h"
#include "event.h"

namespace apiary {

// Append target for serialized envelopes. Appends are serialized by each
// implementation; concurrent sessions may emit simultaneously but a line is
// always written whole.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void append(const std::string& honeypot_id,
                        const EventEnvelope& env) = 0;
    virtual void flush() {}
};

// One append-only .jsonl file per honeypot per UTC day:
// <dir>/<honeypot_id>-YYYYMMDD.jsonl
class JsonlFileSink : public EventSink {
public:
    explicit JsonlFileSink(std::filesystem::path dir);
    void append(const std::string& honeypot_id,
                const EventEnvelope& env) override;
    void flush() override;

private:
    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::string, std::ofstream> files_;
};

class MemorySink : public EventSink {
public:
    void append(const std::string& honeypot_id,
                const EventEnvelope& env) override;
    std::vector<std::pair<std::string, EventEnvelope>> entries() const;
    std::vector<EventEnvelope> envelopes() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, EventEnvelope>> entries_;
};

// RFC 5424 over UDP, facility local0, severity informational (PRI 134).
class SyslogUdpSink : public EventSink {
public:
    SyslogUdpSink(const std::string& host, int port, Clock& clock);
    ~SyslogUdpSink() override;
    void append(const std::string& honeypot_id,
                const EventEnvelope& env) override;

private:
    std::mutex mu_;
    int fd_ = -1;
    Clock& clock_;
    std::string local_hostname_;
};

class TeeSink : public EventSink {
public:
    void add(EventSink* sink) { sinks_.push_back(sink); }
    void append(const std::string& honeypot_id,
                const EventEnvelope& env) override {
        for (auto* s : sinks_) s->append(honeypot_id, env);
    }
    void flush() override {
        for (auto* s : sinks_) s->flush();
    }

private:
    std::vector<EventSink*> sinks_;
};

// Per-session envelope factory: owns the seq counter and enforces
// non-decreasing timestamps within the session.
class SessionEmitter {
public:
    SessionEmitter(std::string session_id, std::string honeypot_id,
                   Clock& clock, EventSink& sink)
        : session_id_(std::move(session_id)),
          honeypot_id_(std::move(honeypot_id)),
          clock_(clock),
          sink_(sink) {}

    EventEnvelope emit(EventPayload payload);

    const std::string& session_id() const { return session_id_; }
    std::uint64_t next_seq() const { return next_seq_; }

private:
    std::string session_id_;
    std::string honeypot_id_;
    Clock& clock_;
    EventSink& sink_;
    std::uint64_t next_seq_ = 0;
    std::int64_t last_ts_ = 0;
};

}  // namespace apiary
