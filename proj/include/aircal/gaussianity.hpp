#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aircal/matching.hpp"

namespace aircal {

struct Histogram {
    std::vector<double> bin_edges;        // bins + 1 ascending edges
    std::vector<std::uint64_t> counts;    // one per bin
    std::size_t n = 0;
};

enum class NormalityMethod { shapiro_wilk, lilliefors };

struct NormalityResult {
    double statistic = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
    NormalityMethod method = NormalityMethod::shapiro_wilk;
    bool large_n_warning = false;
};

// Equal-width histogram over [min, max]; interior edges are half-open to
// the right, the last bin is closed. A degenerate range is widened by 0.5
// on each side.
Histogram histogram(std::span<const double> values, std::size_t bins);

// Shapiro-Wilk W test using Royston's 1995 algorithm (AS R94): Blom
// approximate normal scores with polynomial-corrected end coefficients, W
// computed as the squared correlation between the sorted sample and the
// coefficient vector, and Royston's normalizing transforms for the
// p-value. Needs 3 <= n; sets large_n_warning above n = 5000 where the
// p-value approximation degrades.
NormalityResult shapiro_wilk(std::span<const double> values);

// Kolmogorov-Smirnov test against a normal with estimated mean and sample
// std (Lilliefors). The p-value uses the Dallal-Wilkinson approximation
// and is clamped to [0.001, 0.5], matching its validity range. Needs
// 4 <= n.
NormalityResult lilliefors(std::span<const double> values);

// One report cell: a contiguous slice of one value stream, tested both
// ways plus a histogram. Per-test failures are recorded in the error
// strings instead of aborting the report.
struct NormalityCell {
    std::string series;  // "features" or "labels"
    int k = 0;
    int slice = 0;  // 1-based
    std::size_t n = 0;
    std::optional<NormalityResult> shapiro;
    std::optional<NormalityResult> lillie;
    std::string shapiro_error;
    std::string lillie_error;
    std::optional<Histogram> hist;
};

struct NormalityReport {
    std::vector<NormalityCell> cells;
    std::size_t bins = 0;
    std::string provenance;
};

// Slices the matched samples into k = 2 and k = 4 contiguous runs (longer
// slices first, as slice_equal does), then tests the flattened feature
// values and the labels of each run. Runs that cannot be formed produce
// cells flagged TooFewValues.
NormalityReport normality_report(const MatchedDataSet& ds,
                                 std::size_t bins = 100);

void write_normality_csv(std::ostream& out, const NormalityReport& rep);
std::string format_normality_table(const NormalityReport& rep);

}  // namespace aircal
