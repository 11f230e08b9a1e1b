#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

#include "aircal/forest.hpp"
#include "aircal/matching.hpp"
#include "aircal/nn.hpp"
#include "aircal/svr.hpp"

namespace aircal {

enum class ModelKind : std::uint8_t {
    rfr = 1,
    svr = 2,
    cnn = 3,
    cnn_lstm = 4,
};

const char* to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(const std::string& name);

struct TrainConfig {
    ModelKind kind = ModelKind::rfr;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
    RfrConfig rfr;
    SvrConfig svr;
    nn::CnnConfig cnn;
    nn::CnnLstmConfig cnn_lstm;
};

struct TrainMeta {
    std::uint64_t seed = 0;
    std::uint64_t data_fingerprint = 0;
    double validation_mae = 0.0;  // ppm, on the held-out split
    bool converged = true;
    std::uint32_t epochs_run = 0;  // neural kinds only
    // Per-epoch held-out MAE in ppm, neural kinds only. Kept for training
    // logs; not part of the on-disk model format.
    std::vector<double> val_mae_history;
};

// A trained calibration model. Tree models carry no scaler (they are
// invariant to monotone feature maps); the others standardize features and
// target with statistics from the training split.
class Model {
public:
    ModelKind kind = ModelKind::rfr;
    TrainConfig config;
    TrainMeta meta;
    std::optional<Scaler> scaler;
    std::optional<RandomForest> forest;
    std::optional<Svr> svr;
    std::optional<nn::Network> net;

    std::vector<double> predict_rows(std::span<const FeatureRow> rows) const;
};

// Seeded shuffle split; the two halves keep time order internally and
// partition the input exactly. train gets ceil((1 - fraction) * n).
// Needs n >= 10 (TooFewSamples) and fraction in (0, 1).
std::pair<MatchedDataSet, MatchedDataSet> split_train_val(
    const MatchedDataSet& ds, double validation_fraction, std::uint64_t seed);

// Order-independent digest of a matched data set.
std::uint64_t data_fingerprint(const MatchedDataSet& ds);

Model train_model(const MatchedDataSet& ds, const TrainConfig& cfg);

std::vector<double> predict(const Model& model,
                            std::span<const FeatureRow> rows);
// Width-checked variant for rows of unknown provenance (BadRowWidth).
std::vector<double> predict(const Model& model,
                            const std::vector<std::vector<double>>& rows);

// Differentiation audits for the two neural architectures: max relative
// error between backprop and central differences over sampled parameters.
double gradient_check(const nn::CnnConfig& cfg, std::span<const FeatureRow> x,
                      std::span<const double> y, double eps = 1e-5,
                      std::size_t sample_params = 200,
                      std::uint64_t seed = 2026);
double gradient_check(const nn::CnnLstmConfig& cfg,
                      std::span<const FeatureRow> x,
                      std::span<const double> y, double eps = 1e-5,
                      std::size_t sample_params = 200,
                      std::uint64_t seed = 2026);

void save_model(const Model& model, const std::filesystem::path& file);
Model load_model(const std::filesystem::path& file);

}  // namespace aircal
