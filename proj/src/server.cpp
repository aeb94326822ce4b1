#include "server.h"

#include <algorithm>
#include <fstream>

#include "util.h"

namespace apiary {

std::optional<std::vector<std::pair<std::string, std::string>>>
load_credential_pairs(const std::string& path,
                      std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open credential list: " + path);
        return std::nullopt;
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int lineno = 0;
    bool ok = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto colon = t.find(':');
        if (colon == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) +
                             ": expected username:password");
            ok = false;
            continue;
        }
        pairs.emplace_back(t.substr(0, colon), t.substr(colon + 1));
    }
    if (!ok) return std::nullopt;
    return pairs;
}

ServerFarm::ServerFarm(const Config& config, Clock& clock, std::uint64_t seed)
    : config_(config), clock_(clock), seed_(seed) {}

ServerFarm::~ServerFarm() { stop(); }

bool ServerFarm::load_runtime(const HoneypotEntry& entry, Runtime& rt,
                              std::string& error) {
    rt.entry = &entry;
    std::vector<std::string> errors;
    if (entry.type == HoneypotType::shell) {
        rt.device =
            DeviceProfile::load(config_.resolve(entry.profile_dir), errors);
        if (rt.device) rt.fs = FakeFilesystem::build(*rt.device, errors);
        switch (entry.policy) {
            case CredentialPolicy::Phase::accept_all:
                rt.policy = CredentialPolicy::make_accept_all();
                break;
            case CredentialPolicy::Phase::allowlist: {
                auto pairs = CredentialPolicy::default_allowlist_pairs();
                if (!entry.allowlist_file.empty()) {
                    auto extra = load_credential_pairs(
                        config_.resolve(entry.allowlist_file), errors);
                    if (extra)
                        pairs.insert(pairs.end(), extra->begin(),
                                     extra->end());
                }
                rt.policy = CredentialPolicy::make_allowlist(std::move(pairs));
                break;
            }
            case CredentialPolicy::Phase::single:
                rt.policy = CredentialPolicy::make_single(entry.username,
                                                          entry.password);
                break;
        }
    } else {
        rt.camera =
            CameraProfile::load(config_.resolve(entry.profile_dir), errors);
        rt.signatures = SignatureSet::load_file(
            config_.resolve(entry.signatures_file), errors);
    }
    if (!errors.empty()) {
        error = "honeypot '" + entry.id + "': " + errors.front();
        return false;
    }
    if (seed_ != 0) rt.rng.reseed(seed_ + runtimes_.size());
    return true;
}

bool ServerFarm::start(std::string& error) {
    if (running_) {
        error = "already running";
        return false;
    }
    if (config_.honeypots.empty()) {
        error = "no honeypots configured";
        return false;
    }

    // phase 1: load every asset, bind every port; abort leaves no trace
    for (const auto& entry : config_.honeypots) {
        auto rt = std::make_unique<Runtime>();
        if (!load_runtime(entry, *rt, error)) {
            runtimes_.clear();
            return false;
        }
        runtimes_.push_back(std::move(rt));
    }
    for (auto& rt : runtimes_) {
        std::string bind_error;
        if (!rt->listener.open(rt->entry->listen_addr, rt->entry->listen_port,
                               bind_error)) {
            error = "honeypot '" + rt->entry->id + "': bind " +
                    rt->entry->listen_addr + ":" +
                    std::to_string(rt->entry->listen_port) + ": " +
                    bind_error;
            for (auto& other : runtimes_) other->listener.close();
            runtimes_.clear();
            return false;
        }
    }

    // phase 2: sinks and stores (these create directories)
    if (config_.syslog)
        syslog_ = std::make_unique<SyslogUdpSink>(config_.syslog->host,
                                                  config_.syslog->port,
                                                  clock_);
    for (auto& rt : runtimes_) {
        std::string log_dir = log_dir_override_.empty()
                                  ? config_.resolve(rt->entry->log_dir)
                                  : log_dir_override_;
        rt->file_sink = std::make_unique<JsonlFileSink>(log_dir);
        rt->tee = std::make_unique<TeeSink>();
        rt->tee->add(rt->file_sink.get());
        if (syslog_) rt->tee->add(syslog_.get());
        if (extra_sink_) rt->tee->add(extra_sink_);
        if (!rt->entry->artifacts_dir.empty())
            rt->artifacts = std::make_unique<ArtifactStore>(
                config_.resolve(rt->entry->artifacts_dir));
    }

    boot_ms_ = clock_.now_ms();
    running_ = true;
    for (auto& rt : runtimes_) {
        Runtime* r = rt.get();
        r->accept_thread = std::thread([this, r] { accept_loop(*r); });
    }
    return true;
}

void ServerFarm::accept_loop(Runtime& rt) {
    while (running_) {
        std::unique_ptr<TcpStream> conn = rt.listener.accept();
        if (!conn) break;  // listener closed
        reap_finished();
        TcpStream* raw = conn.get();
        // registration happens inside the lock so the handler's exit path,
        // which takes the same lock first, always finds its own entries
        std::lock_guard<std::mutex> lock(mu_);
        std::uint64_t child_seed = rt.rng.next_u64();
        ++active_connections_;
        open_streams_.push_back(raw);
        live_threads_.emplace_back(
            [this, &rt, owned = std::move(conn), child_seed, raw]() mutable {
                serve_connection(rt, *owned, child_seed);
                {
                    std::lock_guard<std::mutex> tail(mu_);
                    open_streams_.erase(std::find(open_streams_.begin(),
                                                  open_streams_.end(), raw));
                    --active_connections_;
                    auto me = std::this_thread::get_id();
                    for (auto it = live_threads_.begin();
                         it != live_threads_.end(); ++it) {
                        if (it->get_id() == me) {
                            finished_threads_.push_back(std::move(*it));
                            live_threads_.erase(it);
                            break;
                        }
                    }
                    idle_cv_.notify_all();
                }
                owned.reset();  // close after deregistering, never before
            });
    }
}

void ServerFarm::serve_connection(Runtime& rt, TcpStream& conn,
                                  std::uint64_t child_seed) {
    Rng rng(child_seed);
    const HoneypotEntry& entry = *rt.entry;
    if (entry.type == HoneypotType::shell) {
        ShellConfig cfg;
        cfg.profile = &*rt.device;
        cfg.fs = &*rt.fs;
        cfg.policy = rt.policy;
        cfg.protocol = entry.protocol;
        cfg.honeypot_id = entry.id;
        cfg.download_mode = entry.download_mode;
        cfg.artifacts = rt.artifacts.get();
        run_shell_session(conn, cfg, *rt.tee, clock_, rng, boot_ms_);
    } else {
        CameraConfig cfg;
        cfg.profile = &*rt.camera;
        cfg.signatures = rt.signatures ? &*rt.signatures : nullptr;
        cfg.honeypot_id = entry.id;
        cfg.artifacts = rt.artifacts.get();
        run_camera_session(conn, cfg, *rt.tee, clock_, rng);
    }
}

void ServerFarm::reap_finished() {
    std::vector<std::thread> done;
    {
        std::lock_guard<std::mutex> lock(mu_);
        done.swap(finished_threads_);
    }
    for (auto& t : done)
        if (t.joinable()) t.join();
}

void ServerFarm::stop() {
    if (!running_) return;
    running_ = false;
    for (auto& rt : runtimes_) rt->listener.close();
    for (auto& rt : runtimes_)
        if (rt->accept_thread.joinable()) rt->accept_thread.join();
    {
        // wake every blocked handler; each emits its session_close on the
        // way out and deregisters itself
        std::unique_lock<std::mutex> lock(mu_);
        for (TcpStream* stream : open_streams_) stream->shutdown_io();
        idle_cv_.wait_for(lock, std::chrono::seconds(10),
                          [this] { return active_connections_ == 0; });
    }
    reap_finished();
    std::vector<std::thread> leftovers;
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (auto& t : live_threads_) leftovers.push_back(std::move(t));
        live_threads_.clear();
    }
    for (auto& t : leftovers)
        if (t.joinable()) t.join();
    reap_finished();
    for (auto& rt : runtimes_)
        if (rt->file_sink) rt->file_sink->flush();
    runtimes_.clear();
    syslog_.reset();
}

bool ServerFarm::wait_idle(int timeout_ms) {
    std::unique_lock<std::mutex> lock(mu_);
    return idle_cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                             [this] { return active_connections_ == 0; });
}

int ServerFarm::port_of(const std::string& honeypot_id) const {
    for (const auto& rt : runtimes_)
        if (rt->entry->id == honeypot_id) return rt->listener.bound_port();
    return 0;
}

std::vector<std::pair<std::string, int>> ServerFarm::endpoints() const {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& rt : runtimes_)
        out.emplace_back(rt->entry->id, rt->listener.bound_port());
    return out;
}

}  // namespace apiary
