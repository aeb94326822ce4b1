#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artifact_store.h"
#include "clock.h"
#include "event.h"
#include "net.h"
#include "rng.h"
#include "signatures.h"
#include "sinks.h"

namespace apiary {

// One admin page: exact request path, handler id, template asset name.
struct PageSpec {
    std::string path;
    std::string handler;  // device_status|stream_page|network_info|
                          // password_change|user_create|firmware_upload
    bool auth_required = true;
    std::string template_asset;
};

// Everything the camera serves is profile data: identity strings, the six
// admin pages, error pages and the looped frame set live in a directory.
struct CameraProfile {
    std::string dir;
    std::string model;
    int listen_port = 80;
    std::string realm;
    std::string server_header;
    std::string firmware_version;
    std::string admin_username;
    std::string admin_password;
    std::string mac;
    std::string lan_ip;
    std::string gateway;
    std::string netmask;
    int frame_interval_ms = 200;
    std::string stream_boundary;
    std::vector<PageSpec> pages;
    std::vector<std::string> frames;  // jpeg bytes, loop order
    std::string page_400;
    std::string page_401;
    std::string page_404;
    std::string success_page;
    std::string upgrading_page;

    static std::optional<CameraProfile> load(const std::string& dir,
                                             std::vector<std::string>& errors);

    const PageSpec* find_page(const std::string& path) const;
};

// {{name}} placeholders replaced from vars; unknown names left intact
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& vars);

struct CameraConfig {
    const CameraProfile* profile = nullptr;
    const SignatureSet* signatures = nullptr;  // optional
    std::string honeypot_id = "camera";
    ArtifactStore* artifacts = nullptr;  // required for firmware capture
    std::int64_t max_body_bytes = 2 * 1024 * 1024;
    std::int64_t max_artifact_bytes = 5 * 1024 * 1024;
    int max_requests_per_connection = 100;
};

// Serves one accepted connection until close/keep-alive exhaustion.
// Every request (malformed included) emits exactly one HttpEvent; the
// session is bracketed by session_open/session_close envelopes.
void run_camera_session(ByteStream& stream, const CameraConfig& cfg,
                        EventSink& sink, Clock& clock, Rng& rng);

}  // namespace apiary
