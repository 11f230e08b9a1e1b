#pragma once

#include <array>
#include <span>
#include <vector>

#include "aircal/matching.hpp"

namespace aircal {

using FeatureRow = std::array<double, kWindowValues>;

// Per-column standardization (population std). A constant feature column
// raises ZeroVarianceColumn at fit time; a constant target falls back to a
// unit scale so constant-label fits stay usable.
class Scaler {
public:
    void fit(std::span<const FeatureRow> rows, std::span<const double> targets);

    FeatureRow transform_row(const FeatureRow& row) const;
    std::vector<FeatureRow> transform(std::span<const FeatureRow> rows) const;
    double transform_target(double y) const;
    std::vector<double> transform_targets(std::span<const double> ys) const;
    double inverse_target(double y_std) const;

    const FeatureRow& feature_mean() const noexcept { return mean_; }
    const FeatureRow& feature_std() const noexcept { return std_; }
    double target_mean() const noexcept { return y_mean_; }
    double target_std() const noexcept { return y_std_; }

    // For deserialization.
    void set(const FeatureRow& mean, const FeatureRow& std, double y_mean,
             double y_std);

private:
    FeatureRow mean_{};
    FeatureRow std_{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    double y_mean_ = 0.0;
    double y_std_ = 1.0;
};

}  // namespace aircal
