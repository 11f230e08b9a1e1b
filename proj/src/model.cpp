#include "aircal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "aircal/errors.hpp"
#include "aircal/metrics.hpp"
#include "aircal/rng.hpp"

namespace aircal {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::rfr: return "rfr";
        case ModelKind::svr: return "svr";
        case ModelKind::cnn: return "cnn";
        case ModelKind::cnn_lstm: return "cnn_lstm";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(const std::string& name) {
    if (name == "rfr") return ModelKind::rfr;
    if (name == "svr") return ModelKind::svr;
    if (name == "cnn") return ModelKind::cnn;
    if (name == "cnn_lstm") return ModelKind::cnn_lstm;
    return std::nullopt;
}

std::pair<MatchedDataSet, MatchedDataSet> split_train_val(
    const MatchedDataSet& ds, double validation_fraction,
    std::uint64_t seed) {
    if (ds.size() < 10) {
        throw TooFewSamples("split_train_val needs n >= 10, got " +
                            std::to_string(ds.size()));
    }
    if (validation_fraction <= 0.0 || validation_fraction >= 1.0) {
        throw InvalidConfig("validation_fraction must lie in (0, 1)");
    }
    const std::size_t n = ds.size();
    const auto train_n = static_cast<std::size_t>(
        std::ceil((1.0 - validation_fraction) * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() +
                                           static_cast<std::ptrdiff_t>(
                                               train_n));
    std::vector<std::size_t> val_idx(
        order.begin() + static_cast<std::ptrdiff_t>(train_n), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());

    MatchedDataSet train;
    MatchedDataSet val;
    train.provenance = ds.provenance + " [train]";
    val.provenance = ds.provenance + " [val]";
    for (std::size_t i : train_idx) train.samples.push_back(ds.samples[i]);
    for (std::size_t i : val_idx) val.samples.push_back(ds.samples[i]);
    return {std::move(train), std::move(val)};
}

std::uint64_t data_fingerprint(const MatchedDataSet& ds) {
    // Each sample is digested on its own and the digests are summed, so
    // the result ignores sample order but still sees duplicates.
    std::uint64_t combined = 0;
    for (const auto& s : ds.samples) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto fold_u64 = [&h](std::uint64_t v) {
            h = detail::fnv1a_step(h, v);
        };
        auto fold_f64 = [&](double v) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            fold_u64(bits);
        };
        fold_u64(static_cast<std::uint64_t>(s.epoch_s));
        for (double f : s.features) fold_f64(f);
        fold_f64(s.label);
        fold_u64(static_cast<std::uint64_t>(s.imputed_count));
        combined += h;
    }
    std::uint64_t out = 0xcbf29ce484222325ull;
    out = detail::fnv1a_step(out, ds.size());
    out = detail::fnv1a_step(out, combined);
    return out;
}

namespace {

struct SplitArrays {
    std::vector<FeatureRow> x_train;
    std::vector<double> y_train;
    std::vector<FeatureRow> x_val;
    std::vector<double> y_val;
};

SplitArrays to_arrays(const MatchedDataSet& train, const MatchedDataSet& val) {
    SplitArrays a;
    for (const auto& s : train.samples) {
        a.x_train.push_back(s.features);
        a.y_train.push_back(s.label);
    }
    for (const auto& s : val.samples) {
        a.x_val.push_back(s.features);
        a.y_val.push_back(s.label);
    }
    return a;
}

void check_finite(const MatchedDataSet& ds) {
    for (const auto& s : ds.samples) {
        for (double f : s.features) {
            if (!std::isfinite(f)) throw NonFiniteInput("matched feature");
        }
        if (!std::isfinite(s.label)) throw NonFiniteInput("matched label");
    }
}

}  // namespace

Model train_model(const MatchedDataSet& ds, const TrainConfig& cfg) {
    check_finite(ds);
    auto [train, val] =
        split_train_val(ds, cfg.validation_fraction,
                        derive_seed(cfg.seed, "split"));
    const SplitArrays a = to_arrays(train, val);

    Model model;
    model.kind = cfg.kind;
    model.config = cfg;
    model.meta.seed = cfg.seed;
    model.meta.data_fingerprint = data_fingerprint(ds);
    model.meta.converged = true;

    switch (cfg.kind) {
        case ModelKind::rfr: {
            RandomForest forest;
            forest.fit(a.x_train, a.y_train, cfg.rfr, cfg.seed);
            model.forest = std::move(forest);
            break;
        }
        case ModelKind::svr: {
            Scaler scaler;
            scaler.fit(a.x_train, a.y_train);
            Svr svr;
            svr.fit(scaler.transform(a.x_train),
                    scaler.transform_targets(a.y_train), cfg.svr,
                    derive_seed(cfg.seed, "svr"));
            model.meta.converged = svr.converged();
            model.scaler = scaler;
            model.svr = std::move(svr);
            break;
        }
        case ModelKind::cnn: {
            Scaler scaler;
            scaler.fit(a.x_train, a.y_train);
            nn::Network net =
                nn::build_cnn(cfg.cnn, derive_seed(cfg.seed, "init"));
            nn::Adam opt(cfg.cnn.learning_rate, cfg.cnn.beta1, cfg.cnn.beta2,
                         cfg.cnn.adam_eps);
            nn::FitOptions opts{cfg.cnn.max_epochs, cfg.cnn.patience,
                                cfg.cnn.batch_size};
            Rng shuffle(derive_seed(cfg.seed, "shuffle"));
            const auto res = nn::fit_network(
                net, opt, scaler.transform(a.x_train),
                scaler.transform_targets(a.y_train),
                scaler.transform(a.x_val), scaler.transform_targets(a.y_val),
                opts, shuffle);
            model.meta.converged = res.early_stopped;
            model.meta.epochs_run = static_cast<std::uint32_t>(res.epochs_run);
            model.meta.val_mae_history = res.val_mae_history;
            for (double& v : model.meta.val_mae_history) {
                v *= scaler.target_std();
            }
            model.scaler = scaler;
            model.net = std::move(net);
            break;
        }
        case ModelKind::cnn_lstm: {
            Scaler scaler;
            scaler.fit(a.x_train, a.y_train);
            nn::Network net = nn::build_cnn_lstm(
                cfg.cnn_lstm, derive_seed(cfg.seed, "init"));
            nn::ClippedSgd opt(cfg.cnn_lstm.learning_rate,
                               cfg.cnn_lstm.clip_norm);
            nn::FitOptions opts{cfg.cnn_lstm.max_epochs, cfg.cnn_lstm.patience,
                                cfg.cnn_lstm.batch_size};
            Rng shuffle(derive_seed(cfg.seed, "shuffle"));
            const auto res = nn::fit_network(
                net, opt, scaler.transform(a.x_train),
                scaler.transform_targets(a.y_train),
                scaler.transform(a.x_val), scaler.transform_targets(a.y_val),
                opts, shuffle);
            model.meta.converged = res.early_stopped;
            model.meta.epochs_run = static_cast<std::uint32_t>(res.epochs_run);
            model.meta.val_mae_history = res.val_mae_history;
            for (double& v : model.meta.val_mae_history) {
                v *= scaler.target_std();
            }
            model.scaler = scaler;
            model.net = std::move(net);
            break;
        }
    }
    model.meta.validation_mae = mae(model.predict_rows(a.x_val), a.y_val);
    return model;
}

std::vector<double> Model::predict_rows(
    std::span<const FeatureRow> rows) const {
    if (rows.empty()) throw EmptyInput("predict with no rows");
    for (const auto& r : rows) {
        for (double v : r) {
            if (!std::isfinite(v)) throw NonFiniteInput("prediction feature");
        }
    }
    switch (kind) {
        case ModelKind::rfr:
            return forest->predict(rows);
        case ModelKind::svr: {
            const auto xs = scaler->transform(rows);
            std::vector<double> out = svr->predict(xs);
            for (double& v : out) v = scaler->inverse_target(v);
            return out;
        }
        case ModelKind::cnn:
        case ModelKind::cnn_lstm: {
            const auto xs = scaler->transform(rows);
            auto& mutable_net = const_cast<nn::Network&>(*net);
            std::vector<double> out = nn::predict_network(mutable_net, xs);
            for (double& v : out) v = scaler->inverse_target(v);
            return out;
        }
    }
    throw InvalidConfig("unknown model kind");
}

std::vector<double> predict(const Model& model,
                            std::span<const FeatureRow> rows) {
    return model.predict_rows(rows);
}

std::vector<double> predict(const Model& model,
                            const std::vector<std::vector<double>>& rows) {
    std::vector<FeatureRow> fixed;
    fixed.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != kWindowValues) {
            throw BadRowWidth("row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) +
                              " values, expected " +
                              std::to_string(kWindowValues));
        }
        FeatureRow r;
        std::copy(rows[i].begin(), rows[i].end(), r.begin());
        fixed.push_back(r);
    }
    return model.predict_rows(fixed);
}

namespace {

double run_fd_check(nn::Network net, std::span<const FeatureRow> x,
                    std::span<const double> y, double eps,
                    std::size_t sample_params, std::uint64_t seed) {
    if (x.empty() || x.size() != y.size()) {
        throw LengthMismatch("gradient_check batch");
    }
    const nn::Tensor xt = nn::rows_to_tensor(x);
    return nn::finite_difference_check(net, xt, y, sample_params, eps,
                                       derive_seed(seed, "fd-pick"));
}

}  // namespace

double gradient_check(const nn::CnnConfig& cfg, std::span<const FeatureRow> x,
                      std::span<const double> y, double eps,
                      std::size_t sample_params, std::uint64_t seed) {
    return run_fd_check(nn::build_cnn(cfg, derive_seed(seed, "init")), x, y,
                        eps, sample_params, seed);
}

double gradient_check(const nn::CnnLstmConfig& cfg,
                      std::span<const FeatureRow> x,
                      std::span<const double> y, double eps,
                      std::size_t sample_params, std::uint64_t seed) {
    return run_fd_check(nn::build_cnn_lstm(cfg, derive_seed(seed, "init")), x,
                        y, eps, sample_params, seed);
}

}  // namespace aircal
