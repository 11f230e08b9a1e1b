#include "aircal/matching.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aircal/errors.hpp"
#include "aircal/ingestion.hpp"

namespace aircal {

std::vector<double> MatchedDataSet::labels() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
}

std::vector<double> MatchedDataSet::feature_means() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        double sum = 0.0;
        for (double f : s.features) sum += f;
        out.push_back(sum / static_cast<double>(kWindowValues));
    }
    return out;
}

namespace {

void check_inputs(const Series& sensor, const Series& truth,
                  std::int64_t window_s) {
    if (window_s <= 0) {
        throw InvalidWindow("window_s = " + std::to_string(window_s));
    }
    if (sensor.empty()) throw EmptySeries("sensor series is empty");
    if (truth.empty()) throw EmptyTruth("reference series is empty");
}

Series sorted_copy(const Series& s) {
    Series c = s;
    if (!c.is_time_ordered()) c.sort_by_time();
    return c;
}

// Builds one sample from the in-window readings, or nothing when there are
// too few. `first` points at the earliest in-window reading.
bool build_sample(const TimePoint* first, std::size_t count,
                  std::int64_t epoch_s, double label, MatchedSample& out) {
    if (count <= 3) return false;
    out.epoch_s = epoch_s;
    out.label = label;
    const std::size_t take = std::min(count, kWindowValues);
    for (std::size_t i = 0; i < take; ++i) out.features[i] = first[i].value;
    if (count >= kWindowValues) {
        out.imputed_count = 0;
        return true;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += first[i].value;
    const double mean = sum / static_cast<double>(count);
    for (std::size_t i = count; i < kWindowValues; ++i) out.features[i] = mean;
    out.imputed_count = static_cast<int>(kWindowValues - count);
    return true;
}

std::string provenance_of(const Series& sensor, const Series& truth,
                          std::int64_t window_s) {
    return sensor.label + ":" + truth.label + " w=" +
           std::to_string(window_s);
}

}  // namespace

MatchedDataSet match_windows(const Series& sensor, const Series& truth,
                             std::int64_t window_s) {
    check_inputs(sensor, truth, window_s);
    const Series s = sorted_copy(sensor);
    const Series t = sorted_copy(truth);
    const std::int64_t half = window_s / 2;

    MatchedDataSet ds;
    ds.provenance = provenance_of(sensor, truth, window_s);
    std::size_t lo = 0;
    std::size_t hi = 0;
    bool have_prev = false;
    std::int64_t prev_epoch = 0;
    for (const auto& tp : t.points) {
        if (have_prev && tp.epoch_s == prev_epoch) continue;
        have_prev = true;
        prev_epoch = tp.epoch_s;
        const std::int64_t w_lo = tp.epoch_s - half;
        const std::int64_t w_hi = tp.epoch_s + half;
        while (lo < s.points.size() && s.points[lo].epoch_s < w_lo) ++lo;
        if (hi < lo) hi = lo;
        while (hi < s.points.size() && s.points[hi].epoch_s < w_hi) ++hi;
        MatchedSample sample;
        if (build_sample(s.points.data() + lo, hi - lo, tp.epoch_s, tp.value,
                         sample)) {
            ds.samples.push_back(sample);
        }
    }
    return ds;
}

MatchedDataSet brute_match(const Series& sensor, const Series& truth,
                           std::int64_t window_s) {
    check_inputs(sensor, truth, window_s);
    const Series s = sorted_copy(sensor);
    const Series t = sorted_copy(truth);
    const std::int64_t half = window_s / 2;

    MatchedDataSet ds;
    ds.provenance = provenance_of(sensor, truth, window_s);
    for (std::size_t ti = 0; ti < t.points.size(); ++ti) {
        const auto& tp = t.points[ti];
        if (ti > 0 && t.points[ti - 1].epoch_s == tp.epoch_s) continue;
        std::vector<TimePoint> inside;
        for (const auto& sp : s.points) {
            if (sp.epoch_s >= tp.epoch_s - half &&
                sp.epoch_s < tp.epoch_s + half) {
                inside.push_back(sp);
            }
        }
        MatchedSample sample;
        if (build_sample(inside.data(), inside.size(), tp.epoch_s, tp.value,
                         sample)) {
            ds.samples.push_back(sample);
        }
    }
    return ds;
}

void write_matched_csv(std::ostream& out, const MatchedDataSet& ds) {
    out << "epoch_s,f1,f2,f3,f4,f5,f6,label,imputed_count\n";
    for (const auto& s : ds.samples) {
        out << s.epoch_s;
        for (double f : s.features) out << ',' << format_double(f);
        out << ',' << format_double(s.label) << ',' << s.imputed_count << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        if (c == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, c - pos));
        pos = c + 1;
    }
    return out;
}

}  // namespace

MatchedDataSet read_matched_csv(std::istream& in, std::string provenance) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    MatchedDataSet ds;
    ds.provenance = std::move(provenance);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!have_header) {
            if (line != "epoch_s,f1,f2,f3,f4,f5,f6,label,imputed_count") {
                throw MalformedLine("unexpected matched-data header", line_no);
            }
            have_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 9) {
            throw MalformedLine("expected 9 fields, got " +
                                    std::to_string(fields.size()),
                                line_no);
        }
        MatchedSample s;
        auto parse_field = [&](const std::string& f, double& v) {
            const auto* last = f.data() + f.size();
            const auto res = std::from_chars(f.data(), last, v);
            if (res.ec != std::errc{} || res.ptr != last) {
                throw MalformedLine("bad number '" + f + "'", line_no);
            }
        };
        {
            const auto& f = fields[0];
            const auto* last = f.data() + f.size();
            const auto res = std::from_chars(f.data(), last, s.epoch_s);
            if (res.ec != std::errc{} || res.ptr != last) {
                throw MalformedLine("bad epoch_s '" + f + "'", line_no);
            }
        }
        for (std::size_t i = 0; i < kWindowValues; ++i) {
            parse_field(fields[1 + i], s.features[i]);
            if (!std::isfinite(s.features[i])) {
                throw InvalidValue("non-finite feature", line_no);
            }
        }
        parse_field(fields[7], s.label);
        if (!std::isfinite(s.label)) {
            throw InvalidValue("non-finite label", line_no);
        }
        double imputed = 0.0;
        parse_field(fields[8], imputed);
        if (imputed != std::floor(imputed) || imputed < 0.0 || imputed > 2.0) {
            throw InvalidValue("imputed_count out of range", line_no);
        }
        s.imputed_count = static_cast<int>(imputed);
        if (!ds.samples.empty() && s.epoch_s <= ds.samples.back().epoch_s) {
            throw InvalidValue("timestamps not strictly increasing", line_no);
        }
        ds.samples.push_back(s);
    }
    if (!have_header) throw EmptyFile("no matched-data header");
    return ds;
}

MatchedDataSet load_matched_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_matched_csv(in, std::filesystem::path(path).stem().string());
}

}  // namespace aircal
