#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aircal {

// Predictions paired with reference values, same length, same order.
struct PredictionPair {
    std::vector<double> predicted;
    std::vector<double> actual;
};

double mae(std::span<const double> predicted, std::span<const double> actual);

// 100 - mean absolute percentage error. Unbounded below; a reference value
// of exactly zero raises ZeroTruthValue.
double accuracy_percent(std::span<const double> predicted,
                        std::span<const double> actual);

// Coefficient of determination, 1 - SS_res / SS_tot. Constant reference
// values raise ZeroVarianceTruth.
double r_squared(std::span<const double> predicted,
                 std::span<const double> actual);

double pearson(std::span<const double> predicted,
               std::span<const double> actual);

// Both sequences histogrammed over shared equal-width bins spanning their
// combined range, smoothed additively by 1e-10 and renormalized so every
// bin has mass on both sides.
struct BinnedPair {
    std::vector<double> bin_edges;
    std::vector<double> p;  // predicted distribution
    std::vector<double> q;  // reference distribution
};

BinnedPair bin_pair(std::span<const double> predicted,
                    std::span<const double> actual, std::size_t bins = 100);

// KL(p || q) in nats, predicted relative to reference.
double kl_divergence(const BinnedPair& bp);
double kl_divergence(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins = 100);

// Jensen-Shannon divergence in nats; symmetric and bounded by ln 2.
double js_divergence(const BinnedPair& bp);
double js_divergence(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins = 100);

// All six metrics at once. Metrics whose preconditions fail individually
// (zero reference value, constant reference, constant side) come back
// unset with a note instead of failing the whole row.
struct MetricRow {
    double mae = 0.0;
    std::optional<double> accuracy_pct;
    std::optional<double> r2;
    std::optional<double> pearson;
    double kl = 0.0;
    double js = 0.0;
    std::size_t bins = 0;
    std::vector<std::string> notes;
};

MetricRow metric_row(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins = 100);

}  // namespace aircal
