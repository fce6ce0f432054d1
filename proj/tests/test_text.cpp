#include "rk/error.hpp"
#include "rk/text.hpp"

#include <doctest.h>

#include <cmath>

using namespace rk;

TEST_CASE("parse_double accepts whole decimal tokens only") {
    CHECK(text::parse_double(" 1.5 ") == 1.5);
    CHECK(text::parse_double("+2") == 2.0);
    CHECK(text::parse_double("-3e2") == -300.0);
    CHECK_FALSE(text::parse_double(""));
    CHECK_FALSE(text::parse_double("1.5x"));
    CHECK_FALSE(text::parse_double("?"));
    CHECK_FALSE(text::parse_double("nan"));
    CHECK_FALSE(text::parse_double("inf"));
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0625, 5e-324}) {
        CHECK(text::parse_double(text::format_double(v)) == v);
        CHECK(text::parse_double(text::format_double17(v)) == v);
    }
    CHECK(text::format_double(0.5) == "0.5");
    CHECK(text::format_fixed(-0.0001, 3) == "0.000");
    CHECK(text::format_fixed(0.12345, 2) == "0.12");
}

TEST_CASE("csv reader handles quotes, CRLF and blank lines") {
    const auto rows = text::parse_csv_text("a,b\r\n\"x,y\",\"he said \"\"hi\"\"\"\r\n\n3,\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b"});
    CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\""});
    CHECK(rows[2] == std::vector<std::string>{"3", ""});
}

TEST_CASE("csv writer escapes only when needed") {
    CHECK(text::csv_row({"a", "b,c", "q\""}) == "a,\"b,c\",\"q\"\"\"\n");
    const auto back = text::parse_csv_text(text::csv_row({"a", "b,c", "q\"", "line\nbreak"}));
    REQUIRE(back.size() == 1);
    CHECK(back[0][3] == "line\nbreak");
}

TEST_CASE("trim, lower and iequals") {
    CHECK(text::trim("\t x y \n") == "x y");
    CHECK(text::lower("CkD") == "ckd");
    CHECK(text::iequals("@DATA", "@data"));
    CHECK_FALSE(text::iequals("abc", "abcd"));
    CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("read_file reports missing files as I/O errors") {
    try {
        text::read_file("/nonexistent/definitely/missing.txt");
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
}
