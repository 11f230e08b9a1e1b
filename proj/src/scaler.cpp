#include "aircal/scaler.hpp"

#include <cmath>
#include <string>

#include "aircal/errors.hpp"

namespace aircal {

void Scaler::fit(std::span<const FeatureRow> rows,
                 std::span<const double> targets) {
    if (rows.empty()) throw EmptyInput("Scaler::fit with no rows");
    if (rows.size() != targets.size()) {
        throw LengthMismatch("Scaler::fit: " + std::to_string(rows.size()) +
                             " rows vs " + std::to_string(targets.size()) +
                             " targets");
    }
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        for (double v : r) {
            if (!std::isfinite(v)) throw NonFiniteInput("Scaler::fit feature");
        }
    }
    for (double y : targets) {
        if (!std::isfinite(y)) throw NonFiniteInput("Scaler::fit target");
    }

    mean_.fill(0.0);
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < kWindowValues; ++c) mean_[c] += r[c];
    }
    for (double& m : mean_) m /= n;
    std_.fill(0.0);
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < kWindowValues; ++c) {
            const double d = r[c] - mean_[c];
            std_[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < kWindowValues; ++c) {
        std_[c] = std::sqrt(std_[c] / n);
        if (std_[c] == 0.0) {
            throw ZeroVarianceColumn("feature column " + std::to_string(c) +
                                     " is constant");
        }
    }

    y_mean_ = 0.0;
    for (double y : targets) y_mean_ += y;
    y_mean_ /= n;
    double ss = 0.0;
    for (double y : targets) {
        const double d = y - y_mean_;
        ss += d * d;
    }
    y_std_ = std::sqrt(ss / n);
    if (y_std_ == 0.0) y_std_ = 1.0;  // constant targets still fit
}

FeatureRow Scaler::transform_row(const FeatureRow& row) const {
    FeatureRow out;
    for (std::size_t c = 0; c < kWindowValues; ++c) {
        out[c] = (row[c] - mean_[c]) / std_[c];
    }
    return out;
}

std::vector<FeatureRow> Scaler::transform(
    std::span<const FeatureRow> rows) const {
    std::vector<FeatureRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(transform_row(r));
    return out;
}

double Scaler::transform_target(double y) const {
    return (y - y_mean_) / y_std_;
}

std::vector<double> Scaler::transform_targets(
    std::span<const double> ys) const {
    std::vector<double> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(transform_target(y));
    return out;
}

double Scaler::inverse_target(double y_std) const {
    return y_std * y_std_ + y_mean_;
}

void Scaler::set(const FeatureRow& mean, const FeatureRow& std, double y_mean,
                 double y_std) {
    mean_ = mean;
    std_ = std;
    y_mean_ = y_mean;
    y_std_ = y_std;
}

}  // namespace aircal
