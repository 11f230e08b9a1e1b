#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aircal {

struct TimePoint {
    std::int64_t epoch_s = 0;
    double value = 0.0;

    friend bool operator==(const TimePoint&, const TimePoint&) = default;
};

// A labelled sequence of (epoch seconds, value) pairs ordered by
// non-decreasing timestamp. Producers (parsers, the generator) establish the
// ordering; consumers may rely on it.
struct Series {
    std::vector<TimePoint> points;
    std::string label;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }

    std::vector<double> values() const;
    bool is_time_ordered() const noexcept;
    void sort_by_time();
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1 denominator)
    double min = 0.0;
    double max = 0.0;
};

// Symmetric 2x2 covariance matrix, sample convention.
struct CovarianceMatrix2 {
    double var_a = 0.0;
    double var_b = 0.0;
    double cov_ab = 0.0;

    double at(int r, int c) const {
        if (r == c) return r == 0 ? var_a : var_b;
        return cov_ab;
    }
};

// Mean / sample std / min / max of the series values. Throws EmptySeries on
// an empty input; a single point reports stddev 0.
SummaryStats summary(const Series& s);
SummaryStats summary_of(std::span<const double> values);

// Splits values into k contiguous slices whose lengths differ by at most
// one, longer slices first: 10 values with k=4 gives 3,3,2,2. Throws
// TooFewValues when fewer than k values are present, InvalidConfig on k=0.
std::vector<std::vector<double>> slice_equal(std::span<const double> values,
                                             std::size_t k);

// Truncates both sequences to the shorter length. Errors if either is empty.
std::pair<std::vector<double>, std::vector<double>> align_truncate(
    std::span<const double> a, std::span<const double> b);

// Sample covariance matrix of two equal-length sequences (n >= 2).
CovarianceMatrix2 covariance2(std::span<const double> a,
                              std::span<const double> b);

}  // namespace aircal
