#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aircal/scaler.hpp"

namespace aircal {

struct RfrConfig {
    std::size_t n_trees = 10;
    bool bootstrap = true;
    std::size_t min_samples_leaf = 1;
};

// Exact greedy CART regression tree: every feature considered at every
// split, thresholds at midpoints of consecutive sorted values, best
// variance reduction wins with ties broken toward the lowest feature index
// and then the lowest threshold. Grown to purity subject to
// min_samples_leaf.
class RegressionTree {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    void fit(std::span<const FeatureRow> X, std::span<const double> y,
             std::vector<std::size_t> indices, std::size_t min_samples_leaf);
    double predict(const FeatureRow& row) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    void set_nodes(std::vector<Node> nodes) { nodes_ = std::move(nodes); }

private:
    std::int32_t grow(std::span<const FeatureRow> X, std::span<const double> y,
                      std::vector<std::size_t>& idx, std::size_t lo,
                      std::size_t hi, std::size_t min_samples_leaf);

    std::vector<Node> nodes_;
};

// Mean of n_trees CART trees, each fit on an n-of-n bootstrap resample.
// Tree i draws from seed root_seed + i. Works on raw ppm features: the
// trees are invariant to any strictly increasing per-feature transform, so
// no scaler is involved.
class RandomForest {
public:
    void fit(std::span<const FeatureRow> X, std::span<const double> y,
             const RfrConfig& cfg, std::uint64_t root_seed);
    double predict(const FeatureRow& row) const;
    std::vector<double> predict(std::span<const FeatureRow> rows) const;

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    std::vector<RegressionTree>& trees() noexcept { return trees_; }
    const RfrConfig& config() const noexcept { return cfg_; }
    void set_config(const RfrConfig& cfg) { cfg_ = cfg; }

private:
    RfrConfig cfg_;
    std::vector<RegressionTree> trees_;
};

}  // namespace aircal
