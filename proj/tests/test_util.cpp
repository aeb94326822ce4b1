#include <doctest.h>

#include "util.h"

using namespace apiary;

TEST_CASE("sha256 known vectors") {
    // FIPS 180-2 test vectors
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sanitize_capture escapes control and non-ascii bytes") {
    CHECK(sanitize_capture("plain text 123") == "plain text 123");
    CHECK(sanitize_capture("tab\there") == "tab\\x09here");
    CHECK(sanitize_capture(std::string("nul\0byte", 8)) == "nul\\x00byte");
    CHECK(sanitize_capture("\xff\xfe") == "\\xff\\xfe");
    CHECK(sanitize_capture("back\\slash") == "back\\x5cslash");
    CHECK(sanitize_capture("\x7f") == "\\x7f");
    // printable range passes through untouched
    std::string printable;
    for (int c = 0x20; c <= 0x7e; ++c)
        if (c != '\\') printable.push_back(static_cast<char>(c));
    CHECK(sanitize_capture(printable) == printable);
}

TEST_CASE("sanitize_capture output is unambiguous") {
    // two different inputs never sanitize to the same string
    CHECK(sanitize_capture("\\x00") == "\\x5cx00");
    CHECK(sanitize_capture(std::string(1, '\0')) == "\\x00");
    CHECK(sanitize_capture("\\x00") != sanitize_capture(std::string(1, '\0')));
}

TEST_CASE("base64 round trip and rejection") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYmFy") == std::string("foobar"));
    CHECK(base64_decode("Zg==") == std::string("f"));
    CHECK_FALSE(base64_decode("Zg==Zg").has_value());
    CHECK_FALSE(base64_decode("!!!!").has_value());
    CHECK(base64_decode("YWRtaW46MTIzNA==") == std::string("admin:1234"));
}

TEST_CASE("string helpers") {
    CHECK(trim("  a b  ") == "a b");
    CHECK(trim("\t\r\n") == "");
    CHECK(to_lower("MiXeD") == "mixed");
    CHECK(iequals("Content-Length", "content-length"));
    CHECK_FALSE(iequals("a", "ab"));
    CHECK(starts_with("foobar", "foo"));
    CHECK(ends_with("foobar", "bar"));
    CHECK(contains("haystack", "sta"));

    auto parts = split("a,b,,c", ',');
    REQUIRE(parts.size() == 4);
    CHECK(parts[0] == "a");
    CHECK(parts[2] == "");
    CHECK(split("", ',').size() == 1);
}

TEST_CASE("env reference expansion") {
    setenv("APIARY_TEST_TOKEN", "sekrit", 1);
    CHECK(expand_env_ref("env:APIARY_TEST_TOKEN") == "sekrit");
    CHECK(expand_env_ref("literal") == "literal");
    CHECK(expand_env_ref("env:APIARY_TEST_MISSING_VAR") == "");
    unsetenv("APIARY_TEST_TOKEN");
}
