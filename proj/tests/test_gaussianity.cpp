#include <algorithm>
#include <sstream>
#include <vector>

#include "aircal/errors.hpp"
#include "aircal/gaussianity.hpp"
#include "aircal/matching.hpp"
#include "aircal/rng.hpp"
#include "doctest.h"

using namespace aircal;

namespace {

const std::vector<double> kEight{410, 412, 415, 409, 420, 418, 411, 414};

const std::vector<double> kTwelve{0.5, -1.2, 0.3,  2.2, -0.7, 1.1,
                                  0.0, -0.4, 0.9, -1.5, 0.2,  0.6};

// Twenty independent draws from an exponential distribution, strongly
// right-skewed, frozen as literals.
const std::vector<double> kTwentyExp{
    0.707529, 1.025203, 0.568549, 0.89511,  0.206533, 3.383637, 0.009754,
    2.809216, 0.575333, 0.300534, 0.541136, 0.312146, 0.89977,  1.073701,
    1.88425,  0.222071, 3.144673, 0.735857, 0.348373, 0.883565};

// Fifty draws from a normal centred near 420, frozen as literals.
const std::vector<double> kFifty{
    421.523585, 414.800079, 423.752256, 424.702824, 410.244824, 413.489102,
    420.639202, 418.418787, 419.915994, 415.73478,  424.39699,  423.88896,
    420.330153, 425.636206, 422.337547, 415.703538, 421.843754, 415.205587,
    424.392252, 419.75037,  419.075688, 416.595352, 426.112707, 419.227353,
    417.858361, 418.239332, 422.661546, 421.82722,  422.063663, 422.154105,
    430.708238, 417.967925, 417.438786, 415.931136, 423.079897, 425.644861,
    419.430263, 415.799218, 415.877594, 423.252964, 423.716271, 422.715771,
    416.672451, 421.160807, 420.583429, 421.093443, 424.357144, 421.117978,
    423.394568, 420.337895};

}  // namespace

TEST_CASE("shapiro-wilk on three points is exact") {
    const NormalityResult r = shapiro_wilk(std::vector<double>{1, 2, 3});
    CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.n == 3);
    CHECK_FALSE(r.large_n_warning);
}

TEST_CASE("shapiro-wilk five-point reference value") {
    const NormalityResult r = shapiro_wilk(std::vector<double>{2, 4, 1, 9, 7});
    CHECK(r.statistic == doctest::Approx(0.9416251211893166).epsilon(1e-9));
    // The last digits of the statistic feed the normalizing transform, so
    // the p-value carries a slightly larger propagated error.
    CHECK(r.p_value == doctest::Approx(0.6774497777687205).epsilon(1e-7));
}

TEST_CASE("shapiro-wilk eight-point reference value") {
    const NormalityResult r = shapiro_wilk(kEight);
    CHECK(r.statistic == doctest::Approx(0.9444155034592704).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.6549765725153096).epsilon(1e-9));
}

TEST_CASE("shapiro-wilk twelve-point reference value") {
    const NormalityResult r = shapiro_wilk(kTwelve);
    CHECK(r.statistic == doctest::Approx(0.9806903907913825).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.9862448590040297).epsilon(1e-9));
}

TEST_CASE("shapiro-wilk flags skewed data") {
    const NormalityResult r = shapiro_wilk(kTwentyExp);
    CHECK(r.statistic == doctest::Approx(0.7827539355995728).epsilon(1e-9));
    CHECK(r.p_value ==
          doctest::Approx(0.0004832512963689698).epsilon(1e-6));
    CHECK(r.p_value < 0.05);
}

TEST_CASE("shapiro-wilk fifty-point reference value") {
    const NormalityResult r = shapiro_wilk(kFifty);
    CHECK(r.statistic == doctest::Approx(0.9840504782048002).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.7301432759198752).epsilon(1e-9));
}

TEST_CASE("shapiro-wilk input validation") {
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1, 2}), TooFewValues);
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{5, 5, 5, 5}),
                    ZeroVariance);
}

TEST_CASE("shapiro-wilk warns past five thousand values") {
    Rng rng(77);
    std::vector<double> big(5001);
    for (double& v : big) v = rng.normal();
    CHECK(shapiro_wilk(big).large_n_warning);
    big.resize(5000);
    CHECK_FALSE(shapiro_wilk(big).large_n_warning);
}

TEST_CASE("shapiro-wilk is invariant to affine maps and permutation") {
    const NormalityResult base = shapiro_wilk(kTwelve);
    std::vector<double> mapped = kTwelve;
    for (double& v : mapped) v = 3.5 * v - 120.0;
    const NormalityResult aff = shapiro_wilk(mapped);
    CHECK(aff.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(aff.p_value == doctest::Approx(base.p_value).epsilon(1e-12));

    std::vector<double> shuffled = kTwelve;
    Rng rng(5);
    rng.shuffle(shuffled);
    const NormalityResult perm = shapiro_wilk(shuffled);
    CHECK(perm.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
}

TEST_CASE("lilliefors eight-point reference value") {
    const NormalityResult r = lilliefors(kEight);
    CHECK(r.statistic == doctest::Approx(0.16196642214560159).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lilliefors twelve-point reference value") {
    const NormalityResult r = lilliefors(kTwelve);
    CHECK(r.statistic == doctest::Approx(0.10222018486653933).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lilliefors rejects skewed data at its floor") {
    const NormalityResult r = lilliefors(kTwentyExp);
    CHECK(r.statistic == doctest::Approx(0.28096377551291285).epsilon(1e-9));
    CHECK(r.p_value == 0.001);
}

TEST_CASE("lilliefors fifty-point reference value") {
    const NormalityResult r = lilliefors(kFifty);
    CHECK(r.statistic == doctest::Approx(0.06692693604619881).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lilliefors two-level data reference value") {
    std::vector<double> v(50, 0.0);
    std::fill(v.begin() + 25, v.end(), 1.0);
    const NormalityResult r = lilliefors(v);
    CHECK(r.statistic == doctest::Approx(0.33890059691870916).epsilon(1e-9));
    CHECK(r.p_value == 0.001);
}

TEST_CASE("lilliefors validation and p-value clamp") {
    CHECK_THROWS_AS(lilliefors(std::vector<double>{1, 2, 3}), TooFewValues);
    CHECK_THROWS_AS(lilliefors(std::vector<double>{2, 2, 2, 2}),
                    ZeroVariance);
    const NormalityResult r = lilliefors(kFifty);
    CHECK(r.p_value <= 0.5);
    CHECK(r.p_value >= 0.001);
}

TEST_CASE("lilliefors is affine invariant") {
    const NormalityResult base = lilliefors(kFifty);
    std::vector<double> mapped = kFifty;
    for (double& v : mapped) v = -2.0 * v + 1000.0;
    // A sign flip mirrors the sample; the statistic is preserved.
    const NormalityResult neg = lilliefors(mapped);
    CHECK(neg.statistic == doctest::Approx(base.statistic).epsilon(1e-9));
    for (double& v : mapped) v = 0.25 * v + 3.0;
    const NormalityResult pos = lilliefors(mapped);
    CHECK(pos.statistic == doctest::Approx(neg.statistic).epsilon(1e-9));
}

TEST_CASE("histogram splits the range into equal bins") {
    const Histogram h = histogram(std::vector<double>{0, 1, 2, 3}, 2);
    REQUIRE(h.bin_edges.size() == 3);
    CHECK(h.bin_edges[0] == 0.0);
    CHECK(h.bin_edges[1] == doctest::Approx(1.5));
    CHECK(h.bin_edges[2] == 3.0);
    CHECK(h.counts == std::vector<std::uint64_t>{2, 2});
    CHECK(h.n == 4);
}

TEST_CASE("histogram of constant data widens around the value") {
    const Histogram h = histogram(std::vector<double>{7, 7, 7}, 4);
    CHECK(h.bin_edges.front() == doctest::Approx(6.5));
    CHECK(h.bin_edges.back() == doctest::Approx(7.5));
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 3);
}

TEST_CASE("histogram validation") {
    CHECK_THROWS_AS(histogram(std::vector<double>{}, 4), EmptyInput);
    CHECK_THROWS_AS(histogram(std::vector<double>{1.0}, 0), InvalidConfig);
    CHECK_THROWS_AS(
        histogram(std::vector<double>{1.0, std::nan("")}, 4),
        NonFiniteInput);
}

namespace {

MatchedDataSet synthetic_matched(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    MatchedDataSet ds;
    for (std::size_t i = 0; i < n; ++i) {
        MatchedSample m;
        m.epoch_s = static_cast<std::int64_t>(i) * 60;
        for (double& f : m.features) f = rng.normal(420.0, 10.0);
        m.label = rng.normal(420.0, 2.0);
        ds.samples.push_back(m);
    }
    ds.provenance = "synthetic";
    return ds;
}

}  // namespace

TEST_CASE("normality report covers both streams at both slicings") {
    const MatchedDataSet ds = synthetic_matched(200, 3);
    const NormalityReport rep = normality_report(ds, 20);
    // 2 + 4 slices for each of the two streams.
    CHECK(rep.cells.size() == 12);
    for (const auto& cell : rep.cells) {
        CHECK((cell.series == "features" || cell.series == "labels"));
        CHECK((cell.k == 2 || cell.k == 4));
        CHECK(cell.shapiro.has_value());
        CHECK(cell.lillie.has_value());
        CHECK(cell.hist.has_value());
        CHECK(cell.n > 0);
    }
    // Feature cells hold six values per sample.
    CHECK(rep.cells[0].n == 600);
}

TEST_CASE("normality report slices samples, not flattened values") {
    const MatchedDataSet ds = synthetic_matched(10, 4);
    const NormalityReport rep = normality_report(ds, 10);
    std::size_t k4_feature_total = 0;
    for (const auto& cell : rep.cells) {
        if (cell.series == "features" && cell.k == 4) {
            k4_feature_total += cell.n;
            // 10 samples split 3,3,2,2; six values each.
            CHECK((cell.n == 18 || cell.n == 12));
        }
    }
    CHECK(k4_feature_total == 60);
}

TEST_CASE("too few samples flags every affected cell") {
    const MatchedDataSet ds = synthetic_matched(3, 5);
    const NormalityReport rep = normality_report(ds, 10);
    std::size_t flagged = 0;
    for (const auto& cell : rep.cells) {
        if (cell.k == 4) {
            CHECK_FALSE(cell.shapiro.has_value());
            CHECK(cell.shapiro_error.find("TooFewValues") != std::string::npos);
            ++flagged;
        }
    }
    CHECK(flagged == 8);  // k=4 cells for both streams
}

TEST_CASE("normality csv has one row per cell and method") {
    const MatchedDataSet ds = synthetic_matched(100, 6);
    const NormalityReport rep = normality_report(ds, 10);
    std::ostringstream out;
    write_normality_csv(out, rep);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "series,k,slice,n,method,statistic,p_value,warning");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * rep.cells.size());
}

TEST_CASE("report is deterministic") {
    const MatchedDataSet ds = synthetic_matched(150, 7);
    const NormalityReport a = normality_report(ds, 30);
    const NormalityReport b = normality_report(ds, 30);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        if (a.cells[i].shapiro) {
            CHECK(a.cells[i].shapiro->p_value ==
                  b.cells[i].shapiro->p_value);
        }
    }
}
