#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "morse/io.hpp"

using namespace morse;

namespace {

ScalarField tiny_field() {
    ScalarField f;
    f.grid.nq = 3;
    f.grid.np = 2;
    // j = 0 is the bottom row (p_min), j = 1 the top.
    f.values = {0.0, 1.0, 2.0, 3.0, 4.0, 10.0};
    f.flags = {CellStatus::Ok, CellStatus::Ok, CellStatus::Ok,
               CellStatus::Ok, CellStatus::Escaped, CellStatus::Ok};
    return f;
}

std::uint16_t sample16(const std::string& data, std::size_t offset, std::size_t k) {
    const auto hi = static_cast<unsigned char>(data[offset + 2 * k]);
    const auto lo = static_cast<unsigned char>(data[offset + 2 * k + 1]);
    return static_cast<std::uint16_t>(hi << 8 | lo);
}

}  // namespace

TEST_CASE("format_double") {
    CHECK(io::format_double(2 * std::numbers::pi) == "6.2831853071795862");
    CHECK(io::format_double(6.0) == "6");
    CHECK(io::format_double(0.0) == "0");
    CHECK(io::format_double(-std::log(2.0)) == "-0.69314718055994529");
    CHECK(io::format_double(1e-300) == "1e-300");
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");

    SUBCASE("round trips bitwise") {
        std::mt19937_64 rng(29);
        std::uniform_int_distribution<std::uint64_t> bits;
        int checked = 0;
        while (checked < 5000) {
            const std::uint64_t b = bits(rng);
            double v;
            std::memcpy(&v, &b, sizeof v);
            if (!std::isfinite(v)) continue;
            ++checked;
            const std::string s = io::format_double(v);
            CHECK(s.find(',') == std::string::npos);
            double back = 0.0;
            std::from_chars(s.data(), s.data() + s.size(), back);
            CHECK(std::memcmp(&back, &v, sizeof v) == 0);
        }
    }
}

TEST_CASE("csv writer") {
    CHECK(io::csv_escape("plain") == "plain");
    CHECK(io::csv_escape("a,b") == "\"a,b\"");
    CHECK(io::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(io::csv_escape("two\nlines") == "\"two\nlines\"");

    std::ostringstream out;
    io::CsvWriter csv(out);
    csv.header({"h", "T"});
    csv.field(6.0).field(2 * std::numbers::pi);
    csv.end_row();
    csv.field(7LL).field(std::string("x,y"));
    csv.end_row();
    CHECK(out.str() == "h,T\n6,6.2831853071795862\n7,\"x,y\"\n");
}

TEST_CASE("pgm writers") {
    std::ostringstream out;
    io::write_pgm16(out, 2, 1, {0x0102, 0xfffe});
    const std::string s = out.str();
    const std::string head = "P5\n2 1\n65535\n";
    REQUIRE(s.size() == head.size() + 4);
    CHECK(s.substr(0, head.size()) == head);
    CHECK(sample16(s, head.size(), 0) == 0x0102);
    CHECK(sample16(s, head.size(), 1) == 0xfffe);

    std::ostringstream out8;
    io::write_pgm8(out8, 1, 2, {0, 255});
    CHECK(out8.str() == std::string("P5\n1 2\n255\n") + '\0' + '\xff');

    std::ostringstream bad;
    CHECK_THROWS_AS(io::write_pgm16(bad, 2, 2, {1, 2, 3}), io::IoError);
}

TEST_CASE("field images") {
    const ScalarField f = tiny_field();
    const auto px = io::field_pixels(f);
    REQUIRE(px.size() == 6);
    // Top image row is the p_max row: values 3, (flagged), 10.
    CHECK(px[0] == static_cast<std::uint16_t>(std::lround(0.3 * 65535.0)));
    CHECK(px[1] == 0);
    CHECK(px[2] == 65535);
    CHECK(px[3] == 0);
    CHECK(px[4] == static_cast<std::uint16_t>(std::lround(0.1 * 65535.0)));
    CHECK(px[5] == static_cast<std::uint16_t>(std::lround(0.2 * 65535.0)));

    const auto mask = io::field_mask(f);
    const std::vector<std::uint8_t> want{0, 255, 0, 0, 0, 0};
    CHECK(mask == want);

    ScalarField flat = tiny_field();
    flat.values.assign(6, 5.0);
    for (std::uint16_t v : io::field_pixels(flat)) CHECK(v == 0);
}

TEST_CASE("field csv") {
    ScalarField f = tiny_field();
    f.grid.q_min = 0.0;
    f.grid.q_max = 3.0;
    f.grid.p_min = -1.0;
    f.grid.p_max = 1.0;
    std::ostringstream out;
    io::write_field_csv(out, f);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "q,p,value,flag");
    std::getline(in, line);
    CHECK(line == "0.5,-0.5,0,0");
    int rows = 1;
    while (std::getline(in, line)) {
        ++rows;
        if (rows == 5) CHECK(line == "1.5,0.5,4,1");
    }
    CHECK(rows == 6);
}

TEST_CASE("open_output reports failures") {
    CHECK_THROWS_AS(io::open_output("/nonexistent-dir/x/y.csv"), io::IoError);
}
