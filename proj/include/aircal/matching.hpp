#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aircal/timeseries.hpp"

namespace aircal {

inline constexpr std::size_t kWindowValues = 6;

struct MatchedSample {
    std::int64_t epoch_s = 0;  // reference instrument timestamp
    std::array<double, kWindowValues> features{};
    double label = 0.0;
    int imputed_count = 0;

    friend bool operator==(const MatchedSample&, const MatchedSample&) =
        default;
};

struct MatchedDataSet {
    std::vector<MatchedSample> samples;
    std::string provenance;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    std::vector<double> labels() const;
    std::vector<double> feature_means() const;
};

// Pairs each reference reading with the sensor readings inside the centred
// half-open window [t - w/2, t + w/2). Six or more readings: the first six
// by timestamp become the feature row. Four or five: the row is padded to
// six with the mean of the present readings (appended after them) and
// imputed_count records the padding. Three or fewer: the reference point is
// dropped. Duplicate reference timestamps keep the first occurrence.
//
// window_s must be positive (InvalidWindow); empty inputs raise
// EmptySeries / EmptyTruth.
MatchedDataSet match_windows(const Series& sensor, const Series& truth,
                             std::int64_t window_s = 60);

// Reference implementation: same contract, but a full scan of the sensor
// series for every reference point and no incremental state. Kept for
// equivalence testing against match_windows; do not use on large inputs.
MatchedDataSet brute_match(const Series& sensor, const Series& truth,
                           std::int64_t window_s = 60);

void write_matched_csv(std::ostream& out, const MatchedDataSet& ds);
MatchedDataSet read_matched_csv(std::istream& in, std::string provenance = "");
MatchedDataSet load_matched_csv(const std::string& path);

}  // namespace aircal
