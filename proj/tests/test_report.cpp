#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include <json.hpp>

#include "artifact_store.h"
#include "report.h"
#include "util.h"

using namespace apiary;

namespace {

EventEnvelope env(const std::string& sid, std::uint64_t seq, std::int64_t ts,
                  EventPayload payload) {
    EventEnvelope e;
    e.session_id = sid;
    e.seq = seq;
    e.timestamp_ms = ts;
    e.kind = payload_kind(payload);
    e.payload = std::move(payload);
    return e;
}

std::string sid(char c) { return std::string(32, c); }

// two shell sessions and one camera session with enough variety to light up
// every report section
EventStore sample_store() {
    EventStore store;
    std::uint64_t seq_a = 0, seq_b = 0, seq_c = 0;

    SessionOpen open_a;
    open_a.honeypot_id = "shell1";
    open_a.protocol = Protocol::telnet;
    open_a.source_addr = "10.1.1.1";
    open_a.source_port = 40001;
    open_a.client_banner = "SSH-2.0-Go";
    store.add(env(sid('a'), seq_a++, 1000, open_a));
    AuthAttempt auth1;
    auth1.username = "root";
    auth1.password = "admin,\"x\"";  // exercises csv quoting downstream
    auth1.success = true;
    store.add(env(sid('a'), seq_a++, 1100, auth1));
    CommandEvent cmd;
    cmd.raw_line = "uname -a";
    store.add(env(sid('a'), seq_a++, 1200, cmd));
    DownloadEvent dl;
    dl.url = "http://203.0.113.5/bins.sh";
    dl.sha256 = sha256_hex("wget x86 arm mips");
    dl.size_bytes = 17;
    dl.stored_path = "bins.sh";
    dl.fetched = true;
    store.add(env(sid('a'), seq_a++, 1300, dl));
    SessionClose close_a;
    close_a.bytes_served = 100;
    store.add(env(sid('a'), seq_a++, 1400, close_a));

    SessionOpen open_b;
    open_b.honeypot_id = "shell1";
    open_b.protocol = Protocol::telnet;
    open_b.source_addr = "10.2.2.2";
    open_b.source_port = 40002;
    store.add(env(sid('b'), seq_b++, 2000, open_b));
    AuthAttempt auth2;
    auth2.username = "root";
    auth2.password = "admin,\"x\"";
    store.add(env(sid('b'), seq_b++, 2100, auth2));
    AuthAttempt auth3;
    auth3.username = "admin";
    auth3.password = "1234";
    store.add(env(sid('b'), seq_b++, 2200, auth3));
    SessionClose close_b;
    store.add(env(sid('b'), seq_b++, 2300, close_b));

    SessionOpen open_c;
    open_c.honeypot_id = "cam1";
    open_c.protocol = Protocol::http;
    open_c.source_addr = "99.9.9.9";
    open_c.source_port = 40003;
    store.add(env(sid('c'), seq_c++, 3000, open_c));
    HttpEvent http;
    http.method = "GET";
    http.path_and_query = "/device.rsp?opt=user&cmd=list";
    http.status = 404;
    http.matched_signatures = {"CVE-2018-9995"};
    store.add(env(sid('c'), seq_c++, 3100, http));
    SignatureHit hit;
    hit.label = "CVE-2018-9995";
    hit.method = "GET";
    hit.path_and_query = "/device.rsp?opt=user&cmd=list";
    store.add(env(sid('c'), seq_c++, 3200, hit));
    HttpEvent post;
    post.method = "POST";
    post.path_and_query = "/upgrade.cgi";
    post.status = 200;
    store.add(env(sid('c'), seq_c++, 3300, post));
    FirmwareUpload fw;
    fw.sha256 = sha256_hex("firmware");
    fw.size_bytes = 8;
    store.add(env(sid('c'), seq_c++, 3400, fw));
    SessionClose close_c;
    store.add(env(sid('c'), seq_c++, 3500, close_c));

    store.finalize();
    return store;
}

struct Fixtures {
    EventStore store = sample_store();
    GeoTable geo;
    ClassifierRules classifier;
    CategoryRules categories;

    Fixtures() {
        std::vector<std::string> errors;
        geo = *GeoTable::parse("10.0.0.0/8,CN\n", errors);
        classifier = *ClassifierRules::parse("bot Go\nhuman OpenSSH\n", errors);
        categories = *CategoryRules::parse("content PRIVMSG IRCBot\n", errors);
        REQUIRE(errors.empty());
    }

    ReportInputs inputs() {
        ReportInputs in;
        in.store = &store;
        in.geo = &geo;
        in.classifier = &classifier;
        in.categories = &categories;
        return in;
    }
};

}  // namespace

TEST_CASE("markdown report renders every section deterministically") {
    Fixtures fx;
    std::string error;
    auto doc = emit_report(fx.inputs(), ReportFormat::markdown, {}, error);
    REQUIRE_MESSAGE(doc.has_value(), error);
    CHECK(doc->files.empty());

    const std::string& text = doc->text;
    CHECK(contains(text, "## Top Credentials"));
    CHECK(contains(text, "## Top Commands"));
    CHECK(contains(text, "## Session Statistics"));
    CHECK(contains(text, "## Client Classification"));
    CHECK(contains(text, "## Downloads"));
    CHECK(contains(text, "## Top Countries"));
    CHECK(contains(text, "## Attack Signatures"));

    // hand-tallied facts from the sample corpus
    CHECK(contains(text, "| 1 | root | admin,\"x\" | 2 |"));
    CHECK(contains(text, "| 1 | uname -a | 1 |"));
    CHECK(contains(text, "- hits: 3"));
    CHECK(contains(text, "- login_success_fraction: 0.3333"));
    CHECK(contains(text, "| shell1 | 2 |"));
    CHECK(contains(text, "| cam1 | 1 |"));
    CHECK(contains(text, "- http_GET: 1"));
    CHECK(contains(text, "- http_POST: 1"));
    CHECK(contains(text, "| bot | 1 | 0.3333 |"));
    CHECK(contains(text, "| unknown | 2 | 0.6667 |"));
    CHECK(contains(text, "- firmware_uploads: 1"));
    CHECK(contains(text, "| 1 | CN | 2 |"));
    CHECK(contains(text, "| 2 | ?? | 1 |"));
    CHECK(contains(text, "| CVE-2018-9995 | 1 |"));

    auto again = emit_report(fx.inputs(), ReportFormat::markdown, {}, error);
    REQUIRE(again.has_value());
    CHECK(again->text == text);
}

TEST_CASE("json report round-trips the aggregates with native types") {
    Fixtures fx;
    std::string error;
    auto doc = emit_report(fx.inputs(), ReportFormat::json, {}, error);
    REQUIRE_MESSAGE(doc.has_value(), error);

    auto parsed = nlohmann::json::parse(doc->text);
    CHECK(parsed["credentials"]["top"][0]["username"] == "root");
    CHECK(parsed["credentials"]["top"][0]["count"] == 2);
    CHECK(parsed["sessions"]["hits"] == 3);
    CHECK(parsed["sessions"]["login_success_fraction"].get<double>() ==
          doctest::Approx(1.0 / 3.0));
    CHECK(parsed["sessions"]["per_honeypot"]["shell1"] == 2);
    CHECK(parsed["sessions"]["http_methods"]["GET"] == 1);
    CHECK(parsed["clients"]["bot"]["sessions"] == 1);
    CHECK(parsed["downloads"]["download_events"] == 1);
    CHECK(parsed["downloads"]["distinct_files"] == 1);
    CHECK(parsed["geo"]["top"][0]["country"] == "CN");
    CHECK(parsed["signatures"]["hits"][0]["label"] == "CVE-2018-9995");

    auto again = emit_report(fx.inputs(), ReportFormat::json, {}, error);
    REQUIRE(again.has_value());
    CHECK(again->text == doc->text);
}

TEST_CASE("csv report writes one file per section with proper quoting") {
    Fixtures fx;
    std::string error;
    auto doc = emit_report(fx.inputs(), ReportFormat::csv,
                           {"credentials", "sessions"}, error);
    REQUIRE_MESSAGE(doc.has_value(), error);
    CHECK(doc->text.empty());
    REQUIRE(doc->files.size() == 2);
    CHECK(doc->files[0].first == "credentials.csv");
    CHECK(doc->files[1].first == "sessions.csv");

    // password contains a comma and quotes: field must be quoted and the
    // inner quotes doubled
    CHECK(contains(doc->files[0].second, "1,root,\"admin,\"\"x\"\"\",2"));
    CHECK(contains(doc->files[0].second, "rank,username,password,count"));
    CHECK(contains(doc->files[1].second, "hits,3"));
}

TEST_CASE("section subset keeps request order") {
    Fixtures fx;
    std::string error;
    auto doc = emit_report(fx.inputs(), ReportFormat::markdown,
                           {"signatures", "credentials"}, error);
    REQUIRE(doc.has_value());
    auto sig_pos = doc->text.find("## Attack Signatures");
    auto cred_pos = doc->text.find("## Top Credentials");
    REQUIRE(sig_pos != std::string::npos);
    REQUIRE(cred_pos != std::string::npos);
    CHECK(sig_pos < cred_pos);
    CHECK_FALSE(contains(doc->text, "## Top Countries"));
}

TEST_CASE("unknown sections fail with the valid names listed") {
    Fixtures fx;
    std::string error;
    auto doc = emit_report(fx.inputs(), ReportFormat::markdown,
                           {"credentials", "martian"}, error);
    CHECK_FALSE(doc.has_value());
    CHECK(contains(error, "martian"));
    for (const auto& name : report_section_names())
        CHECK(contains(error, name));
}

TEST_CASE("sections with missing inputs fail up front") {
    Fixtures fx;
    ReportInputs in = fx.inputs();
    in.geo = nullptr;
    std::string error;
    CHECK_FALSE(emit_report(in, ReportFormat::markdown, {"geo"}, error)
                    .has_value());
    CHECK(contains(error, "geo"));

    in = fx.inputs();
    in.classifier = nullptr;
    CHECK_FALSE(emit_report(in, ReportFormat::markdown, {"clients"}, error)
                    .has_value());
    CHECK(contains(error, "clients"));

    in = fx.inputs();
    in.store = nullptr;
    CHECK_FALSE(
        emit_report(in, ReportFormat::markdown, {}, error).has_value());
}

TEST_CASE("empty store renders undefined fractions, not zeros") {
    EventStore store;
    store.finalize();
    ReportInputs in;
    in.store = &store;
    std::string error;
    auto doc =
        emit_report(in, ReportFormat::markdown, {"sessions"}, error);
    REQUIRE(doc.has_value());
    CHECK(contains(doc->text, "- hits: 0"));
    CHECK(contains(doc->text, "login_success_fraction: undefined"));

    auto json_doc = emit_report(in, ReportFormat::json, {"sessions"}, error);
    REQUIRE(json_doc.has_value());
    auto parsed = nlohmann::json::parse(json_doc->text);
    CHECK(parsed["sessions"]["login_success_fraction"].is_null());
}

TEST_CASE("downloads section categorizes stored artifacts") {
    Fixtures fx;
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() /
        ("reptest-artifacts-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    ArtifactStore artifacts(dir);
    auto stored = artifacts.put("wget x86 arm mips");

    // rebuild the store so the download's stored_path points at the blob
    EventStore store;
    SessionOpen open;
    open.honeypot_id = "shell1";
    open.source_addr = "10.1.1.1";
    store.add(env(sid('a'), 0, 1000, open));
    DownloadEvent dl;
    dl.url = "http://203.0.113.5/bins.sh";
    dl.sha256 = stored.sha256;
    dl.stored_path = stored.relative_path;
    dl.fetched = true;
    store.add(env(sid('a'), 1, 1100, dl));
    store.finalize();

    ReportInputs in;
    in.store = &store;
    in.categories = &fx.categories;
    in.artifacts = &artifacts;
    std::string error;
    auto doc = emit_report(in, ReportFormat::markdown, {"downloads"}, error);
    REQUIRE_MESSAGE(doc.has_value(), error);
    CHECK(contains(doc->text, "| SHELLDownloader | 1 |"));

    std::filesystem::remove_all(dir);
}
