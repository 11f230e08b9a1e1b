#include "aircal/gaussianity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "aircal/errors.hpp"
#include "aircal/ingestion.hpp"
#include "aircal/normal_dist.hpp"
#include "aircal/timeseries.hpp"

namespace aircal {

namespace {

void require_finite(std::span<const double> values, const char* where) {
    for (double v : values) {
        if (!std::isfinite(v)) throw NonFiniteInput(where);
    }
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    return x;
}

double poly(const double* c, int n, double x) {
    double v = c[0];
    double p = 1.0;
    for (int i = 1; i < n; ++i) {
        p *= x;
        v += c[i] * p;
    }
    return v;
}

}  // namespace

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw EmptyInput("histogram");
    if (bins == 0) throw InvalidConfig("histogram needs bins >= 1");
    require_finite(values, "histogram");
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.n = values.size();
    h.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.bin_edges[i] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    h.bin_edges[0] = lo;
    h.bin_edges[bins] = hi;
    h.counts.assign(bins, 0);
    const double width = hi - lo;
    for (double v : values) {
        auto idx = static_cast<std::size_t>(
            std::floor((v - lo) / width * static_cast<double>(bins)));
        idx = std::min(idx, bins - 1);
        ++h.counts[idx];
    }
    return h;
}

NormalityResult shapiro_wilk(std::span<const double> values) {
    static constexpr double c1[6] = {0.0,      0.221157,  -0.147981,
                                     -2.071190, 4.434685, -2.706056};
    static constexpr double c2[6] = {0.0,      0.042981,  -0.293762,
                                     -1.752461, 5.682633, -3.582633};
    static constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -2.0322e-3};
    static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 3.8915e-3};
    static constexpr double c6[3] = {-0.4803, -0.082676, 3.0302e-3};
    static constexpr double g[2] = {-2.273, 0.459};

    const std::size_t n = values.size();
    if (n < 3) {
        throw TooFewValues("shapiro_wilk needs n >= 3, got " +
                           std::to_string(n));
    }
    require_finite(values, "shapiro_wilk");
    const std::vector<double> x = sorted_copy(values);
    const double range = x[n - 1] - x[0];
    if (range <= 0.0) throw ZeroVariance("shapiro_wilk: constant sample");

    NormalityResult res;
    res.n = n;
    res.method = NormalityMethod::shapiro_wilk;
    res.large_n_warning = n > 5000;

    const double an = static_cast<double>(n);
    const std::size_t n2 = n / 2;
    std::vector<double> a(n2);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        // Blom scores for the lower half, then Royston's end corrections.
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= n2; ++i) {
            a[i - 1] = normal_ppf((static_cast<double>(i) - 0.375) / an25);
            summ2 += a[i - 1] * a[i - 1];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            const double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) /
                            (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (std::size_t i = i1; i <= n2; ++i) a[i - 1] = -a[i - 1] / fac;
    }

    // W as the squared correlation between the sorted sample and the
    // antisymmetric coefficient vector, in the numerically stable form.
    auto coeff = [&](std::size_t i) -> double {  // 1-based
        const std::size_t j = n + 1 - i;
        if (i == j) return 0.0;
        const double v = a[std::min(i, j) - 1];
        return i < j ? -v : v;
    };
    double sa = 0.0;
    double sx = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        sa += coeff(i);
        sx += x[i - 1] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double asa = coeff(i) - sa;
        const double xsx = x[i - 1] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    double w = 1.0 - w1;
    w = std::clamp(w, 0.0, 1.0);
    res.statistic = w;

    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;
        constexpr double stqr = 1.04719755119660;
        double pw = pi6 * (std::asin(std::sqrt(w)) - stqr);
        res.p_value = std::clamp(pw, 0.0, 1.0);
        return res;
    }
    double y = std::log(1.0 - w);
    double m;
    double s;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            res.p_value = 1e-19;
            return res;
        }
        y = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        const double xx = std::log(an);
        m = poly(c5, 4, xx);
        s = std::exp(poly(c6, 3, xx));
    }
    res.p_value = normal_sf((y - m) / s);
    return res;
}

NormalityResult lilliefors(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 4) {
        throw TooFewValues("lilliefors needs n >= 4, got " +
                           std::to_string(n));
    }
    require_finite(values, "lilliefors");
    const SummaryStats st = summary_of(values);
    if (st.stddev <= 0.0) throw ZeroVariance("lilliefors: constant sample");

    const std::vector<double> x = sorted_copy(values);
    const double an = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = normal_cdf((x[i] - st.mean) / st.stddev);
        const double upper = static_cast<double>(i + 1) / an - z;
        const double lower = z - static_cast<double>(i) / an;
        d = std::max(d, std::max(upper, lower));
    }

    NormalityResult res;
    res.statistic = d;
    res.n = n;
    res.method = NormalityMethod::lilliefors;

    // Dallal-Wilkinson approximation, rescaling to an effective n of 100
    // above that size.
    double kd = d;
    double nd = an;
    if (n > 100) {
        kd = d * std::pow(an / 100.0, 0.49);
        nd = 100.0;
    }
    const double p =
        std::exp(-7.01256 * kd * kd * (nd + 2.78019) +
                 2.99587 * kd * std::sqrt(nd + 2.78019) - 0.122119 +
                 0.974598 / std::sqrt(nd) + 1.67997 / nd);
    res.p_value = std::clamp(p, 0.001, 0.5);
    return res;
}

namespace {

// Slice boundaries over n items, same length rule as slice_equal.
std::vector<std::pair<std::size_t, std::size_t>> slice_bounds(std::size_t n,
                                                              std::size_t k) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        out.emplace_back(pos, pos + len);
        pos += len;
    }
    return out;
}

NormalityCell make_cell(const std::string& series, int k, int slice,
                        std::span<const double> values, std::size_t bins) {
    NormalityCell cell;
    cell.series = series;
    cell.k = k;
    cell.slice = slice;
    cell.n = values.size();
    try {
        cell.shapiro = shapiro_wilk(values);
    } catch (const Error& e) {
        cell.shapiro_error = e.what();
    }
    try {
        cell.lillie = lilliefors(values);
    } catch (const Error& e) {
        cell.lillie_error = e.what();
    }
    if (!values.empty()) {
        try {
            cell.hist = histogram(values, bins);
        } catch (const Error&) {
            cell.hist.reset();
        }
    }
    return cell;
}

}  // namespace

NormalityReport normality_report(const MatchedDataSet& ds, std::size_t bins) {
    if (ds.empty()) throw EmptyInput("normality_report: no matched samples");
    NormalityReport rep;
    rep.bins = bins;
    rep.provenance = ds.provenance;
    const std::size_t n = ds.size();
    for (int k : {2, 4}) {
        if (n < static_cast<std::size_t>(k)) {
            for (const auto* series : {"features", "labels"}) {
                for (int slice = 1; slice <= k; ++slice) {
                    NormalityCell cell;
                    cell.series = series;
                    cell.k = k;
                    cell.slice = slice;
                    cell.shapiro_error =
                        "TooFewValues: " + std::to_string(n) +
                        " samples cannot form " + std::to_string(k) +
                        " slices";
                    cell.lillie_error = cell.shapiro_error;
                    rep.cells.push_back(std::move(cell));
                }
            }
            continue;
        }
        const auto bounds = slice_bounds(n, static_cast<std::size_t>(k));
        for (std::size_t si = 0; si < bounds.size(); ++si) {
            std::vector<double> feats;
            feats.reserve((bounds[si].second - bounds[si].first) *
                          kWindowValues);
            for (std::size_t i = bounds[si].first; i < bounds[si].second; ++i) {
                for (double f : ds.samples[i].features) feats.push_back(f);
            }
            rep.cells.push_back(make_cell("features", k,
                                          static_cast<int>(si + 1), feats,
                                          bins));
        }
        for (std::size_t si = 0; si < bounds.size(); ++si) {
            std::vector<double> labels;
            for (std::size_t i = bounds[si].first; i < bounds[si].second; ++i) {
                labels.push_back(ds.samples[i].label);
            }
            rep.cells.push_back(make_cell("labels", k,
                                          static_cast<int>(si + 1), labels,
                                          bins));
        }
    }
    return rep;
}

namespace {

std::string csv_result(const std::optional<NormalityResult>& r,
                       const std::string& err) {
    if (r) {
        std::string warn = r->large_n_warning ? "large_n" : "";
        return format_double(r->statistic) + "," + format_double(r->p_value) +
               "," + warn;
    }
    std::string tag = err;
    const auto colon = tag.find(':');
    if (colon != std::string::npos) tag.resize(colon);
    return ",," + tag;
}

}  // namespace

void write_normality_csv(std::ostream& out, const NormalityReport& rep) {
    out << "series,k,slice,n,method,statistic,p_value,warning\n";
    for (const auto& c : rep.cells) {
        out << c.series << ',' << c.k << ',' << c.slice << ',' << c.n
            << ",shapiro_wilk," << csv_result(c.shapiro, c.shapiro_error)
            << '\n';
        out << c.series << ',' << c.k << ',' << c.slice << ',' << c.n
            << ",lilliefors," << csv_result(c.lillie, c.lillie_error) << '\n';
    }
}

std::string format_normality_table(const NormalityReport& rep) {
    std::ostringstream os;
    auto fmt3 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };
    for (const auto* series : {"features", "labels"}) {
        for (int k : {2, 4}) {
            os << "Normality of " << series << " split into " << k
               << " slices\n";
            os << "  slice        n    SW stat       SW p    LF stat       LF p\n";
            for (const auto& c : rep.cells) {
                if (c.series != series || c.k != k) continue;
                char line[160];
                std::string sw_s = c.shapiro ? fmt3(c.shapiro->statistic) : "-";
                std::string sw_p = c.shapiro ? fmt3(c.shapiro->p_value) : "-";
                std::string lf_s = c.lillie ? fmt3(c.lillie->statistic) : "-";
                std::string lf_p = c.lillie ? fmt3(c.lillie->p_value) : "-";
                std::snprintf(line, sizeof(line),
                              "  %5d %8zu %10s %10s %10s %10s", c.slice, c.n,
                              sw_s.c_str(), sw_p.c_str(), lf_s.c_str(),
                              lf_p.c_str());
                os << line;
                if ((c.shapiro && c.shapiro->large_n_warning) ||
                    (c.lillie && c.lillie->large_n_warning)) {
                    os << "  [n > 5000: p-value approximation degrades]";
                }
                if (!c.shapiro && !c.shapiro_error.empty()) {
                    os << "  [" << c.shapiro_error << "]";
                }
                os << '\n';
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace aircal
