#pragma once

#include <atomic>
#include <condition_variable>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "camera.h"
#include "config.h"
#include "net.h"
#include "shell.h"
#include "signatures.h"
#include "sinks.h"

namespace apiary {

// `username:password` per line (first colon splits), '#' comments
std::optional<std::vector<std::pair<std::string, std::string>>>
load_credential_pairs(const std::string& path,
                      std::vector<std::string>& errors);

// Hosts every configured honeypot listener in one process. start() loads
// all profiles and binds all ports before anything serves; any failure
// leaves nothing running and creates no log or artifact directories.
// Sessions run thread-per-connection against the injected clock; with a
// nonzero seed all randomness (session ids) is reproducible for
// connections arriving in a deterministic order.
class ServerFarm {
public:
    ServerFarm(const Config& config, Clock& clock, std::uint64_t seed = 0);
    ~ServerFarm();
    ServerFarm(const ServerFarm&) = delete;
    ServerFarm& operator=(const ServerFarm&) = delete;

    bool start(std::string& error);
    void stop();

    // true once no connection handler is active (replay sync point)
    bool wait_idle(int timeout_ms = 10000);

    bool running() const { return running_; }
    int port_of(const std::string& honeypot_id) const;
    std::vector<std::pair<std::string, int>> endpoints() const;

    // applied at start(): replaces every honeypot's configured log_dir
    void override_log_dir(const std::string& dir) { log_dir_override_ = dir; }
    // teed into every honeypot's sink chain (test observation)
    void add_sink(EventSink* sink) { extra_sink_ = sink; }

private:
    struct Runtime {
        const HoneypotEntry* entry = nullptr;
        // shell assets
        std::optional<DeviceProfile> device;
        std::optional<FakeFilesystem> fs;
        CredentialPolicy policy = CredentialPolicy::make_accept_all();
        // camera assets
        std::optional<CameraProfile> camera;
        std::optional<SignatureSet> signatures;
        // shared
        std::unique_ptr<ArtifactStore> artifacts;
        std::unique_ptr<JsonlFileSink> file_sink;
        std::unique_ptr<TeeSink> tee;
        TcpListener listener;
        Rng rng;
        std::thread accept_thread;
    };

    bool load_runtime(const HoneypotEntry& entry, Runtime& rt,
                      std::string& error);
    void accept_loop(Runtime& rt);
    void serve_connection(Runtime& rt, TcpStream& conn,
                          std::uint64_t child_seed);
    void reap_finished();

    const Config& config_;
    Clock& clock_;
    std::uint64_t seed_;
    std::string log_dir_override_;
    EventSink* extra_sink_ = nullptr;
    std::unique_ptr<SyslogUdpSink> syslog_;
    std::vector<std::unique_ptr<Runtime>> runtimes_;
    std::atomic<bool> running_{false};
    std::int64_t boot_ms_ = 0;

    std::mutex mu_;
    std::condition_variable idle_cv_;
    int active_connections_ = 0;
    std::vector<TcpStream*> open_streams_;
    std::list<std::thread> live_threads_;
    std::vector<std::thread> finished_threads_;
};

}  // namespace apiary
