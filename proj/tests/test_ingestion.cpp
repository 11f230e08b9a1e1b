#include <sstream>

#include "aircal/errors.hpp"
#include "aircal/ingestion.hpp"
#include "doctest.h"

using namespace aircal;

TEST_CASE("sensor csv parses integer readings in timestamp order") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,410\n"
        "40,395\n"
        "160,421\n");
    const ParsedSeries p = parse_sensor_csv(in);
    REQUIRE(p.series.size() == 3);
    CHECK(p.series.points[0].epoch_s == 40);
    CHECK(p.series.points[0].value == 395.0);
    CHECK(p.series.points[2].value == 421.0);
    CHECK(p.duplicates_dropped == 0);
}

TEST_CASE("duplicate timestamps keep the first occurrence") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,410\n"
        "100,999\n"
        "100,888\n"
        "200,420\n");
    const ParsedSeries p = parse_sensor_csv(in);
    REQUIRE(p.series.size() == 2);
    CHECK(p.series.points[0].value == 410.0);
    CHECK(p.duplicates_dropped == 2);
}

TEST_CASE("sensor readings must be integers") {
    std::istringstream in("epoch_s,co2_ppm\n100,410.5\n");
    CHECK_THROWS_AS(parse_sensor_csv(in), NonIntegerValue);
}

TEST_CASE("negative sensor readings are rejected with the line number") {
    std::istringstream in("epoch_s,co2_ppm\n100,410\n200,-4\n");
    try {
        parse_sensor_csv(in);
        FAIL("expected a parse failure");
    } catch (const InvalidValue& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("truth csv accepts real readings") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "60,417.93\n"
        "120,418.02\n");
    const ParsedSeries p = parse_truth_csv(in);
    REQUIRE(p.series.size() == 2);
    CHECK(p.series.points[0].value == doctest::Approx(417.93));
    CHECK(p.series.label == "truth");
}

TEST_CASE("truth rejects non-finite and negative values") {
    std::istringstream bad_inf("epoch_s,co2_ppm\n60,inf\n");
    CHECK_THROWS_AS(parse_truth_csv(bad_inf), ParseError);
    std::istringstream bad_neg("epoch_s,co2_ppm\n60,-1.0\n");
    CHECK_THROWS_AS(parse_truth_csv(bad_neg), InvalidValue);
}

TEST_CASE("header must name the two columns") {
    std::istringstream in("time,co2\n100,400\n");
    try {
        parse_sensor_csv(in);
        FAIL("expected a parse failure");
    } catch (const MalformedLine& e) {
        CHECK(e.line() == 1);
    }
}

TEST_CASE("empty stream is rejected") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_sensor_csv(in), EmptyFile);
}

TEST_CASE("header-only stream parses to an empty series") {
    std::istringstream in("epoch_s,co2_ppm\n");
    const ParsedSeries p = parse_sensor_csv(in);
    CHECK(p.series.empty());
}

TEST_CASE("blank lines and trailing carriage returns are tolerated") {
    std::istringstream in(
        "epoch_s,co2_ppm\r\n"
        "\n"
        "100,410\r\n"
        "\n"
        "200,411\n");
    CHECK(parse_sensor_csv(in).series.size() == 2);
}

TEST_CASE("extra columns are ignored") {
    std::istringstream in(
        "epoch_s,co2_ppm,temp_c\n"
        "100,410,21.5\n");
    CHECK(parse_sensor_csv(in).series.size() == 1);
}

TEST_CASE("malformed row reports its line") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,410\n"
        "garbage\n");
    try {
        parse_sensor_csv(in);
        FAIL("expected a parse failure");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("filter_span keeps the half-open range") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,400\n"
        "200,401\n"
        "300,402\n"
        "400,403\n");
    const Series s = parse_sensor_csv(in).series;
    const Series cut = filter_span(s, {200, 400});
    REQUIRE(cut.size() == 2);
    CHECK(cut.points[0].epoch_s == 200);
    CHECK(cut.points[1].epoch_s == 300);
    CHECK_THROWS_AS(filter_span(s, {400, 200}), InvalidWindow);
}

TEST_CASE("sensor write then parse round-trips") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,410\n"
        "200,411\n");
    const Series s = parse_sensor_csv(in).series;
    std::ostringstream out;
    write_sensor_csv(out, s);
    std::istringstream back(out.str());
    CHECK(parse_sensor_csv(back).series.points == s.points);
}

TEST_CASE("truth write then parse round-trips exactly") {
    std::istringstream in(
        "epoch_s,co2_ppm\n"
        "100,417.93000000000001\n"
        "200,0.1\n"
        "300,421\n");
    const Series s = parse_truth_csv(in).series;
    std::ostringstream out;
    write_truth_csv(out, s);
    std::istringstream back(out.str());
    const Series again = parse_truth_csv(back).series;
    REQUIRE(again.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(again.points[i].value == s.points[i].value);
    }
}

TEST_CASE("format_double is shortest round-trip text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(420.0) == "420");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
