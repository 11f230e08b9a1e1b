#include "aircal/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include "aircal/errors.hpp"

namespace aircal {

std::vector<double> Series::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.value);
    return out;
}

bool Series::is_time_ordered() const noexcept {
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].epoch_s < points[i - 1].epoch_s) return false;
    }
    return true;
}

void Series::sort_by_time() {
    std::stable_sort(points.begin(), points.end(),
                     [](const TimePoint& a, const TimePoint& b) {
                         return a.epoch_s < b.epoch_s;
                     });
}

SummaryStats summary_of(std::span<const double> values) {
    if (values.empty()) throw EmptySeries("summary of empty value list");
    SummaryStats st;
    st.n = values.size();
    double sum = 0.0;
    st.min = values[0];
    st.max = values[0];
    for (double v : values) {
        sum += v;
        st.min = std::min(st.min, v);
        st.max = std::max(st.max, v);
    }
    st.mean = sum / static_cast<double>(st.n);
    if (st.n > 1) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - st.mean;
            ss += d * d;
        }
        st.stddev = std::sqrt(ss / static_cast<double>(st.n - 1));
    }
    return st;
}

SummaryStats summary(const Series& s) {
    if (s.empty()) throw EmptySeries("summary of series '" + s.label + "'");
    return summary_of(s.values());
}

std::vector<std::vector<double>> slice_equal(std::span<const double> values,
                                             std::size_t k) {
    if (k == 0) throw InvalidConfig("slice_equal needs k >= 1");
    if (values.size() < k) {
        throw TooFewValues("slice_equal: " + std::to_string(values.size()) +
                           " values for k=" + std::to_string(k));
    }
    const std::size_t base = values.size() / k;
    const std::size_t extra = values.size() % k;
    std::vector<std::vector<double>> out;
    out.reserve(k);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        out.emplace_back(values.begin() + pos, values.begin() + pos + len);
        pos += len;
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> align_truncate(
    std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptyInput("align_truncate");
    const std::size_t n = std::min(a.size(), b.size());
    return {std::vector<double>(a.begin(), a.begin() + n),
            std::vector<double>(b.begin(), b.begin() + n)};
}

CovarianceMatrix2 covariance2(std::span<const double> a,
                              std::span<const double> b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("covariance2: " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
    }
    if (a.size() < 2) throw TooFewValues("covariance2 needs n >= 2");
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    CovarianceMatrix2 m;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        m.var_a += da * da;
        m.var_b += db * db;
        m.cov_ab += da * db;
    }
    m.var_a /= n - 1.0;
    m.var_b /= n - 1.0;
    m.cov_ab /= n - 1.0;
    return m;
}

}  // namespace aircal
