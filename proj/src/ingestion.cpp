#include "aircal/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <system_error>

#include "aircal/errors.hpp"

namespace aircal {

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view sv) {
    return sv.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view trim(std::string_view sv) {
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t'))
        sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t'))
        sv.remove_suffix(1);
    return sv;
}

// First two comma-separated fields of a line; remaining fields ignored.
bool first_two_fields(std::string_view line, std::string_view& a,
                      std::string_view& b) {
    const auto c1 = line.find(',');
    if (c1 == std::string_view::npos) return false;
    a = trim(line.substr(0, c1));
    const auto rest = line.substr(c1 + 1);
    const auto c2 = rest.find(',');
    b = trim(c2 == std::string_view::npos ? rest : rest.substr(0, c2));
    return true;
}

bool parse_i64(std::string_view sv, std::int64_t& out) {
    const auto* last = sv.data() + sv.size();
    const auto res = std::from_chars(sv.data(), last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

bool parse_f64(std::string_view sv, double& out) {
    const auto* last = sv.data() + sv.size();
    const auto res = std::from_chars(sv.data(), last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

void check_header(std::istream& in, std::size_t& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) continue;
        std::string_view a;
        std::string_view b;
        if (!first_two_fields(line, a, b) || a != "epoch_s" || b != "co2_ppm") {
            throw MalformedLine("expected header epoch_s,co2_ppm", line_no);
        }
        return;
    }
    throw EmptyFile("no header row");
}

ParsedSeries finalize(std::vector<TimePoint> pts, std::string label) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const TimePoint& a, const TimePoint& b) {
                         return a.epoch_s < b.epoch_s;
                     });
    ParsedSeries out;
    out.series.label = std::move(label);
    out.series.points.reserve(pts.size());
    for (const auto& p : pts) {
        if (!out.series.points.empty() &&
            out.series.points.back().epoch_s == p.epoch_s) {
            ++out.duplicates_dropped;
            continue;
        }
        out.series.points.push_back(p);
    }
    return out;
}

}  // namespace

ParsedSeries parse_sensor_csv(std::istream& in, std::string label) {
    std::size_t line_no = 0;
    check_header(in, line_no);
    std::vector<TimePoint> pts;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) continue;
        std::string_view ef;
        std::string_view vf;
        if (!first_two_fields(line, ef, vf)) {
            throw MalformedLine("expected at least two fields", line_no);
        }
        std::int64_t epoch = 0;
        if (!parse_i64(ef, epoch)) {
            throw MalformedLine("bad epoch_s '" + std::string(ef) + "'",
                                line_no);
        }
        std::int64_t ppm = 0;
        if (!parse_i64(vf, ppm)) {
            double d = 0.0;
            if (parse_f64(vf, d)) {
                throw NonIntegerValue("sensor co2_ppm '" + std::string(vf) +
                                          "' is not an integer",
                                      line_no);
            }
            throw MalformedLine("bad co2_ppm '" + std::string(vf) + "'",
                                line_no);
        }
        if (ppm < 0) {
            throw InvalidValue("negative sensor reading " + std::to_string(ppm),
                               line_no);
        }
        pts.push_back({epoch, static_cast<double>(ppm)});
    }
    return finalize(std::move(pts), std::move(label));
}

ParsedSeries parse_truth_csv(std::istream& in, std::string label) {
    std::size_t line_no = 0;
    check_header(in, line_no);
    std::vector<TimePoint> pts;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) continue;
        std::string_view ef;
        std::string_view vf;
        if (!first_two_fields(line, ef, vf)) {
            throw MalformedLine("expected at least two fields", line_no);
        }
        std::int64_t epoch = 0;
        if (!parse_i64(ef, epoch)) {
            throw MalformedLine("bad epoch_s '" + std::string(ef) + "'",
                                line_no);
        }
        double ppm = 0.0;
        if (!parse_f64(vf, ppm)) {
            throw MalformedLine("bad co2_ppm '" + std::string(vf) + "'",
                                line_no);
        }
        if (!std::isfinite(ppm)) {
            throw InvalidValue("non-finite truth reading", line_no);
        }
        if (ppm < 0.0) {
            throw InvalidValue("negative truth reading " + format_double(ppm),
                               line_no);
        }
        pts.push_back({epoch, ppm});
    }
    return finalize(std::move(pts), std::move(label));
}

namespace {
std::ifstream open_or_throw(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    return in;
}
}  // namespace

ParsedSeries load_sensor_csv(const std::filesystem::path& file) {
    auto in = open_or_throw(file);
    return parse_sensor_csv(in, file.stem().string());
}

ParsedSeries load_truth_csv(const std::filesystem::path& file) {
    auto in = open_or_throw(file);
    return parse_truth_csv(in, file.stem().string());
}

Series filter_span(const Series& s, const DataSetSpan& span) {
    if (span.end_epoch_s <= span.start_epoch_s) {
        throw InvalidWindow("filter_span: end " +
                            std::to_string(span.end_epoch_s) +
                            " <= start " + std::to_string(span.start_epoch_s));
    }
    Series out;
    out.label = s.label;
    for (const auto& p : s.points) {
        if (p.epoch_s >= span.start_epoch_s && p.epoch_s < span.end_epoch_s) {
            out.points.push_back(p);
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_sensor_csv(std::ostream& out, const Series& s) {
    out << "epoch_s,co2_ppm\n";
    for (const auto& p : s.points) {
        out << p.epoch_s << ',' << static_cast<std::int64_t>(p.value) << '\n';
    }
}

void write_truth_csv(std::ostream& out, const Series& s) {
    out << "epoch_s,co2_ppm\n";
    for (const auto& p : s.points) {
        out << p.epoch_s << ',' << format_double(p.value) << '\n';
    }
}

}  // namespace aircal
