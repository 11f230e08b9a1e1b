#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "aircal/timeseries.hpp"

namespace aircal {

// Half-open time range [start_epoch_s, end_epoch_s).
struct DataSetSpan {
    std::int64_t start_epoch_s = 0;
    std::int64_t end_epoch_s = 0;
};

struct ParsedSeries {
    Series series;
    std::size_t duplicates_dropped = 0;
};

// Both parsers expect a header whose first two columns are
// epoch_s,co2_ppm; extra columns are ignored. Rows are sorted by timestamp
// (stable) and duplicate timestamps are collapsed keep-first, with the
// number of dropped rows reported. Lines are tolerant of a trailing \r and
// blank lines are skipped.
//
// Sensor readings must be non-negative integers (NonIntegerValue /
// InvalidValue otherwise); truth readings are finite non-negative reals.
ParsedSeries parse_sensor_csv(std::istream& in, std::string label = "sensor");
ParsedSeries parse_truth_csv(std::istream& in, std::string label = "truth");

ParsedSeries load_sensor_csv(const std::filesystem::path& file);
ParsedSeries load_truth_csv(const std::filesystem::path& file);

// Keeps the points falling inside the span. Throws InvalidWindow when the
// span is empty or inverted.
Series filter_span(const Series& s, const DataSetSpan& span);

void write_sensor_csv(std::ostream& out, const Series& s);
void write_truth_csv(std::ostream& out, const Series& s);

// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

}  // namespace aircal
