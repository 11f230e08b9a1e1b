#include "aircal/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "aircal/errors.hpp"

namespace aircal {

namespace {

void check_pair(std::span<const double> predicted,
                std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw LengthMismatch(std::to_string(predicted.size()) +
                             " predictions vs " +
                             std::to_string(actual.size()) + " references");
    }
    if (predicted.empty()) throw EmptyInput("metric over empty pair");
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!std::isfinite(predicted[i]) || !std::isfinite(actual[i])) {
            throw NonFiniteInput("metric input at index " + std::to_string(i));
        }
    }
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double mae(std::span<const double> predicted, std::span<const double> actual) {
    check_pair(predicted, actual);
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        s += std::fabs(predicted[i] - actual[i]);
    }
    return s / static_cast<double>(predicted.size());
}

double accuracy_percent(std::span<const double> predicted,
                        std::span<const double> actual) {
    check_pair(predicted, actual);
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (actual[i] == 0.0) {
            throw ZeroTruthValue("reference value is zero at index " +
                                 std::to_string(i));
        }
        s += 100.0 * std::fabs(predicted[i] - actual[i]) /
             std::fabs(actual[i]);
    }
    return 100.0 - s / static_cast<double>(predicted.size());
}

double r_squared(std::span<const double> predicted,
                 std::span<const double> actual) {
    check_pair(predicted, actual);
    const double mean = mean_of(actual);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double r = actual[i] - predicted[i];
        const double t = actual[i] - mean;
        ss_res += r * r;
        ss_tot += t * t;
    }
    if (ss_tot == 0.0) {
        throw ZeroVarianceTruth("constant reference values");
    }
    return 1.0 - ss_res / ss_tot;
}

double pearson(std::span<const double> predicted,
               std::span<const double> actual) {
    check_pair(predicted, actual);
    if (predicted.size() < 2) throw TooFewValues("pearson needs n >= 2");
    const double mp = mean_of(predicted);
    const double ma = mean_of(actual);
    double spp = 0.0;
    double saa = 0.0;
    double spa = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double dp = predicted[i] - mp;
        const double da = actual[i] - ma;
        spp += dp * dp;
        saa += da * da;
        spa += dp * da;
    }
    if (spp == 0.0 || saa == 0.0) {
        throw ZeroVariance("pearson over a constant sequence");
    }
    return spa / std::sqrt(spp * saa);
}

BinnedPair bin_pair(std::span<const double> predicted,
                    std::span<const double> actual, std::size_t bins) {
    check_pair(predicted, actual);
    if (bins < 2) throw InvalidConfig("bin_pair needs bins >= 2");
    double lo = predicted[0];
    double hi = predicted[0];
    for (double v : predicted) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : actual) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    BinnedPair bp;
    bp.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        bp.bin_edges[i] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    bp.bin_edges[bins] = hi;
    bp.p.assign(bins, 0.0);
    bp.q.assign(bins, 0.0);
    const double width = hi - lo;
    auto drop = [&](std::span<const double> v, std::vector<double>& dist) {
        for (double x : v) {
            auto idx = static_cast<std::size_t>(
                std::floor((x - lo) / width * static_cast<double>(bins)));
            idx = std::min(idx, bins - 1);
            dist[idx] += 1.0;
        }
        constexpr double eps = 1e-10;
        double total = 0.0;
        for (double& d : dist) {
            d += eps;
            total += d;
        }
        for (double& d : dist) d /= total;
    };
    drop(predicted, bp.p);
    drop(actual, bp.q);
    return bp;
}

double kl_divergence(const BinnedPair& bp) {
    double s = 0.0;
    for (std::size_t i = 0; i < bp.p.size(); ++i) {
        s += bp.p[i] * std::log(bp.p[i] / bp.q[i]);
    }
    return s;
}

double kl_divergence(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins) {
    return kl_divergence(bin_pair(predicted, actual, bins));
}

double js_divergence(const BinnedPair& bp) {
    double s = 0.0;
    for (std::size_t i = 0; i < bp.p.size(); ++i) {
        const double m = 0.5 * (bp.p[i] + bp.q[i]);
        s += 0.5 * bp.p[i] * std::log(bp.p[i] / m) +
             0.5 * bp.q[i] * std::log(bp.q[i] / m);
    }
    return s;
}

double js_divergence(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins) {
    return js_divergence(bin_pair(predicted, actual, bins));
}

MetricRow metric_row(std::span<const double> predicted,
                     std::span<const double> actual, std::size_t bins) {
    MetricRow row;
    row.bins = bins;
    row.mae = mae(predicted, actual);
    try {
        row.accuracy_pct = accuracy_percent(predicted, actual);
    } catch (const ZeroTruthValue&) {
        row.notes.emplace_back("accuracy skipped: zero reference value");
    }
    try {
        row.r2 = r_squared(predicted, actual);
    } catch (const ZeroVarianceTruth&) {
        row.notes.emplace_back("r2 skipped: constant reference");
    }
    try {
        row.pearson = aircal::pearson(predicted, actual);
    } catch (const Error&) {
        row.notes.emplace_back("pearson skipped: constant sequence");
    }
    const BinnedPair bp = bin_pair(predicted, actual, bins);
    row.kl = kl_divergence(bp);
    row.js = js_divergence(bp);
    return row;
}

}  // namespace aircal
