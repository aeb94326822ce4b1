#include "sinks.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace apiary {

JsonlFileSink::JsonlFileSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void JsonlFileSink::append(const std::string& honeypot_id,
                           const EventEnvelope& env) {
    std::string line = serialize_envelope(env);
    std::string name =
        honeypot_id + "-" + format_yyyymmdd(env.timestamp_ms) + ".jsonl";
    std::lock_guard<std::mutex> lock(mu_);
    auto it = files_.find(name);
    if (it == files_.end()) {
        std::ofstream f(dir_ / name, std::ios::app);
        it = files_.emplace(name, std::move(f)).first;
    }
    it->second << line << '\n';
    it->second.flush();
}

void JsonlFileSink::flush() {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& [name, f] : files_) f.flush();
}

void MemorySink::append(const std::string& honeypot_id,
                        const EventEnvelope& env) {
    std::lock_guard<std::mutex> lock(mu_);
    entries_.emplace_back(honeypot_id, env);
}

std::vector<std::pair<std::string, EventEnvelope>> MemorySink::entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_;
}

std::vector<EventEnvelope> MemorySink::envelopes() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<EventEnvelope> out;
    out.reserve(entries_.size());
    for (const auto& [id, env] : entries_) out.push_back(env);
    return out;
}

void MemorySink::clear() {
    std::lock_guard<std::mutex> lock(mu_);
    entries_.clear();
}

SyslogUdpSink::SyslogUdpSink(const std::string& host, int port, Clock& clock)
    : clock_(clock) {
    char name[256] = "apiary";
    gethostname(name, sizeof(name) - 1);
    local_hostname_ = name;

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                    &res) == 0 &&
        res) {
        fd_ = ::socket(res->ai_family, SOCK_DGRAM, 0);
        if (fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
            ::close(fd_);
            fd_ = -1;
        }
        freeaddrinfo(res);
    }
}

SyslogUdpSink::~SyslogUdpSink() {
    if (fd_ >= 0) ::close(fd_);
}

void SyslogUdpSink::append(const std::string& honeypot_id,
                           const EventEnvelope& env) {
    if (fd_ < 0) return;
    // <local0.info>1 TIMESTAMP HOSTNAME APP PROCID MSGID SD MSG
    std::string msg = "<134>1 " + format_rfc3339_ms(clock_.now_ms()) + " " +
                      local_hostname_ + " apiary " + std::to_string(getpid()) +
                      " " + honeypot_id + " - " + serialize_envelope(env);
    std::lock_guard<std::mutex> lock(mu_);
    ::send(fd_, msg.data(), msg.size(), 0);  // best effort, UDP
}

EventEnvelope SessionEmitter::emit(EventPayload payload) {
    EventEnvelope env;
    env.session_id = session_id_;
    env.seq = next_seq_++;
    std::int64_t ts = clock_.now_ms();
    if (ts < last_ts_) ts = last_ts_;  // clamp: never go backwards in-session
    last_ts_ = ts;
    env.timestamp_ms = ts;
    env.kind = payload_kind(payload);
    env.payload = std::move(payload);
    sink_.append(honeypot_id_, env);
    return env;
}

}  // namespace apiary
