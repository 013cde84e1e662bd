#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "datamap/error.hpp"
#include "datamap/io_util.hpp"

using namespace datamap;

TEST_CASE("format_double round-trips exactly") {
    const double values[] = {0.0,   1.0,        0.1,    -0.25,  1e-300,
                             1e300, 0.33333333, 1.0 / 3.0, 123456.789};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(parse_double(s) == v);
    }
}

TEST_CASE("format_sig pins significant digits") {
    CHECK(format_sig(1.0 / 3.0, 9) == "0.333333333");
    CHECK(format_sig(0.5, 9) == "0.5");
    CHECK(format_sig(2.0, 9) == "2");
}

TEST_CASE("parse_double rejects junk") {
    CHECK_THROWS_AS(parse_double(""), ParseError);
    CHECK_THROWS_AS(parse_double("abc"), ParseError);
    CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
    CHECK_THROWS_AS(parse_double("1.5 "), ParseError);
}

TEST_CASE("split keeps empty fields") {
    const auto f = split("a,,c", ',');
    REQUIRE(f.size() == 3);
    CHECK(f[0] == "a");
    CHECK(f[1] == "");
    CHECK(f[2] == "c");
    CHECK(split("", ',').size() == 1);
}

TEST_CASE("ceil_count and floor_count snap near-integer products") {
    // 0.33 * 3000 = 989.9999... in floats; the intended count is 990
    CHECK(ceil_count(0.33, 3000) == 990);
    CHECK(floor_count(0.33, 3000) == 990);
    CHECK(ceil_count(0.5, 10) == 5);
    CHECK(ceil_count(0.34, 50) == 17);
    // genuinely fractional products still round outward/inward
    CHECK(ceil_count(0.333, 10) == 4);
    CHECK(floor_count(0.333, 10) == 3);
    CHECK(ceil_count(0.01, 7) == 1);
    CHECK(floor_count(0.01, 7) == 0);
}

TEST_CASE("digest_hex is stable and input-sensitive") {
    CHECK(digest_hex("") == "cbf29ce484222325");
    CHECK(digest_hex("abc") != digest_hex("abd"));
    CHECK(digest_hex("abc") == digest_hex("abc"));
    CHECK(digest_hex("abc").size() == 16);
}

TEST_CASE("write_file then read_file round-trips bytes") {
    const std::string path = "io_util_roundtrip.tmp";
    const std::string body = "line1\nline2\n\x01\x02 binary-ish\n";
    write_file(path, body);
    CHECK(read_file(path) == body);
    std::remove(path.c_str());
}

TEST_CASE("read_file on a missing path names the file") {
    CHECK_THROWS_WITH_AS(read_file("no_such_file.xyz"),
                         doctest::Contains("no_such_file.xyz"), IoError);
}
