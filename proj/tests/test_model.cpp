#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "aircal/errors.hpp"
#include "aircal/model.hpp"
#include "aircal/rng.hpp"
#include "doctest.h"

using namespace aircal;

namespace {

// Deterministic matched data set whose label is a noisy linear map of the
// window mean, roughly in outdoor CO2 range.
MatchedDataSet linear_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    MatchedDataSet ds;
    ds.provenance = "unit";
    for (std::size_t i = 0; i < n; ++i) {
        MatchedSample s;
        s.epoch_s = 1'600'000'000 + static_cast<std::int64_t>(i) * 60;
        const double base = 400.0 + 60.0 * rng.uniform(0.0, 1.0);
        for (double& v : s.features) v = base + rng.uniform(-3.0, 3.0);
        double mean = 0.0;
        for (double v : s.features) mean += v;
        mean /= static_cast<double>(kWindowValues);
        s.label = 0.8 * mean + 90.0 + 0.5 * rng.normal();
        ds.samples.push_back(s);
    }
    return ds;
}

TrainConfig quick_config(ModelKind kind, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.kind = kind;
    cfg.seed = seed;
    cfg.rfr.n_trees = 10;
    cfg.cnn.filters = 4;
    cfg.cnn.dilations = {1, 2};
    cfg.cnn.max_epochs = 8;
    cfg.cnn.patience = 8;
    cfg.cnn_lstm.conv_filters = 4;
    cfg.cnn_lstm.lstm_units = 4;
    cfg.cnn_lstm.max_epochs = 8;
    cfg.cnn_lstm.patience = 8;
    return cfg;
}

}  // namespace

TEST_CASE("model kind names round-trip") {
    CHECK(std::string(to_string(ModelKind::rfr)) == "rfr");
    CHECK(std::string(to_string(ModelKind::svr)) == "svr");
    CHECK(std::string(to_string(ModelKind::cnn)) == "cnn");
    CHECK(std::string(to_string(ModelKind::cnn_lstm)) == "cnn_lstm");
    CHECK(parse_model_kind("rfr") == ModelKind::rfr);
    CHECK(parse_model_kind("svr") == ModelKind::svr);
    CHECK(parse_model_kind("cnn") == ModelKind::cnn);
    CHECK(parse_model_kind("cnn_lstm") == ModelKind::cnn_lstm);
    CHECK_FALSE(parse_model_kind("boosted").has_value());
    CHECK_FALSE(parse_model_kind("").has_value());
}

TEST_CASE("split_train_val partitions the set exactly") {
    const MatchedDataSet ds = linear_dataset(103, 1);
    const auto [train, val] = split_train_val(ds, 0.2, 42);

    // ceil(0.8 * 103) = 83
    CHECK(train.size() == 83);
    CHECK(val.size() == 20);
    CHECK(train.provenance == "unit [train]");
    CHECK(val.provenance == "unit [val]");

    // Every original sample appears exactly once across the two halves.
    std::vector<MatchedSample> merged;
    merged.insert(merged.end(), train.samples.begin(), train.samples.end());
    merged.insert(merged.end(), val.samples.begin(), val.samples.end());
    REQUIRE(merged.size() == ds.size());
    auto by_epoch = [](const MatchedSample& a, const MatchedSample& b) {
        return a.epoch_s < b.epoch_s;
    };
    std::sort(merged.begin(), merged.end(), by_epoch);
    CHECK(merged == ds.samples);

    // Both halves keep their internal time order.
    CHECK(std::is_sorted(train.samples.begin(), train.samples.end(), by_epoch));
    CHECK(std::is_sorted(val.samples.begin(), val.samples.end(), by_epoch));
}

TEST_CASE("split_train_val is seed-deterministic and seed-sensitive") {
    const MatchedDataSet ds = linear_dataset(60, 2);
    const auto [t1, v1] = split_train_val(ds, 0.25, 7);
    const auto [t2, v2] = split_train_val(ds, 0.25, 7);
    const auto [t3, v3] = split_train_val(ds, 0.25, 8);
    CHECK(t1.samples == t2.samples);
    CHECK(v1.samples == v2.samples);
    CHECK(t1.samples != t3.samples);
}

TEST_CASE("split_train_val rejects tiny sets and bad fractions") {
    const MatchedDataSet small = linear_dataset(9, 3);
    CHECK_THROWS_AS(split_train_val(small, 0.2, 1), TooFewSamples);
    const MatchedDataSet ok = linear_dataset(10, 3);
    CHECK_NOTHROW(split_train_val(ok, 0.2, 1));
    CHECK_THROWS_AS(split_train_val(ok, 0.0, 1), InvalidConfig);
    CHECK_THROWS_AS(split_train_val(ok, 1.0, 1), InvalidConfig);
    CHECK_THROWS_AS(split_train_val(ok, -0.1, 1), InvalidConfig);
}

TEST_CASE("data fingerprint ignores sample order but not content") {
    MatchedDataSet ds = linear_dataset(40, 4);
    const std::uint64_t before = data_fingerprint(ds);

    MatchedDataSet shuffled = ds;
    std::mt19937_64 gen(99);
    std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), gen);
    CHECK(data_fingerprint(shuffled) == before);

    MatchedDataSet tweaked = ds;
    tweaked.samples[17].label += 0.001;
    CHECK(data_fingerprint(tweaked) != before);

    MatchedDataSet dropped = ds;
    dropped.samples.pop_back();
    CHECK(data_fingerprint(dropped) != before);
}

TEST_CASE("each model kind trains and predicts in label units") {
    const MatchedDataSet ds = linear_dataset(160, 5);
    const std::vector<double> labels = ds.labels();
    const double label_lo = *std::min_element(labels.begin(), labels.end());
    const double label_hi = *std::max_element(labels.begin(), labels.end());

    for (ModelKind kind : {ModelKind::rfr, ModelKind::svr, ModelKind::cnn,
                           ModelKind::cnn_lstm}) {
        CAPTURE(to_string(kind));
        const Model model = train_model(ds, quick_config(kind, 11));
        CHECK(model.kind == kind);
        CHECK(model.meta.seed == 11);
        CHECK(model.meta.data_fingerprint == data_fingerprint(ds));
        CHECK(model.meta.validation_mae >= 0.0);
        // The task is an easy linear map; even the briefly trained nets
        // should land within tens of ppm.
        CHECK(model.meta.validation_mae < 80.0);

        std::vector<FeatureRow> rows;
        for (const auto& s : ds.samples) rows.push_back(s.features);
        const std::vector<double> preds = predict(model, rows);
        REQUIRE(preds.size() == rows.size());
        for (double p : preds) {
            CHECK(std::isfinite(p));
            // Predictions live in the label range, give or take slack for
            // the extrapolating kinds.
            CHECK(p > label_lo - 200.0);
            CHECK(p < label_hi + 200.0);
        }

        if (kind == ModelKind::rfr) {
            CHECK_FALSE(model.scaler.has_value());
            CHECK(model.forest.has_value());
        } else {
            CHECK(model.scaler.has_value());
        }
        if (kind == ModelKind::cnn || kind == ModelKind::cnn_lstm) {
            CHECK(model.meta.epochs_run > 0);
            CHECK(model.meta.val_mae_history.size() == model.meta.epochs_run);
            // History entries are ppm values, same scale as validation_mae.
            const double lowest = *std::min_element(
                model.meta.val_mae_history.begin(),
                model.meta.val_mae_history.end());
            CHECK(lowest == doctest::Approx(model.meta.validation_mae)
                                .epsilon(1e-9));
        }
    }
}

TEST_CASE("training is reproducible for a fixed seed") {
    const MatchedDataSet ds = linear_dataset(120, 6);
    for (ModelKind kind : {ModelKind::rfr, ModelKind::svr, ModelKind::cnn,
                           ModelKind::cnn_lstm}) {
        CAPTURE(to_string(kind));
        const Model a = train_model(ds, quick_config(kind, 21));
        const Model b = train_model(ds, quick_config(kind, 21));
        std::vector<FeatureRow> rows;
        for (const auto& s : ds.samples) rows.push_back(s.features);
        CHECK(predict(a, rows) == predict(b, rows));
        CHECK(a.meta.validation_mae == b.meta.validation_mae);
    }
}

TEST_CASE("width-checked prediction rejects malformed rows") {
    const MatchedDataSet ds = linear_dataset(80, 7);
    const Model model = train_model(ds, quick_config(ModelKind::rfr, 3));

    std::vector<std::vector<double>> good = {{400, 401, 402, 403, 404, 405},
                                             {410, 411, 412, 413, 414, 415}};
    const std::vector<double> preds = predict(model, good);
    CHECK(preds.size() == 2);

    std::vector<std::vector<double>> bad = {{400, 401, 402, 403, 404, 405},
                                            {410, 411, 412}};
    CHECK_THROWS_AS(predict(model, bad), BadRowWidth);
}

TEST_CASE("gradient audit facade reports tiny error on both architectures") {
    // Unit-scale inputs, the regime the networks see after the training
    // pipeline standardizes features.
    Rng rng(8);
    std::vector<FeatureRow> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < 24; ++i) {
        FeatureRow r;
        for (double& v : r) v = rng.uniform(-1.5, 1.5);
        x.push_back(r);
        y.push_back(0.6 * r[0] - 0.3 * r[4] + 0.1 * rng.normal());
    }

    nn::CnnConfig cnn;
    cnn.filters = 4;
    cnn.dilations = {1, 2};
    const double cnn_err = gradient_check(cnn, x, y, 1e-5, 50, 314);
    CHECK(cnn_err < 1e-4);

    nn::CnnLstmConfig lstm;
    lstm.conv_filters = 4;
    lstm.lstm_units = 4;
    const double lstm_err = gradient_check(lstm, x, y, 1e-5, 50, 315);
    CHECK(lstm_err < 1e-4);
}
