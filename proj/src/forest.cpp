#include "aircal/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aircal/errors.hpp"
#include "aircal/rng.hpp"

namespace aircal {

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double reduction = 0.0;
};

double sse_of(double sum, double sum_sq, double n) {
    return sum_sq - sum * sum / n;
}

SplitChoice best_split(std::span<const FeatureRow> X,
                       std::span<const double> y,
                       std::span<const std::size_t> idx,
                       std::size_t min_samples_leaf) {
    const std::size_t n = idx.size();
    double total = 0.0;
    double total_sq = 0.0;
    for (std::size_t i : idx) {
        total += y[i];
        total_sq += y[i] * y[i];
    }
    const double parent_sse = sse_of(total, total_sq, static_cast<double>(n));

    SplitChoice best;
    std::vector<std::size_t> order(idx.begin(), idx.end());
    for (std::size_t f = 0; f < kWindowValues; ++f) {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) {
                      if (X[a][f] != X[b][f]) return X[a][f] < X[b][f];
                      return a < b;
                  });
        double left_sum = 0.0;
        double left_sq = 0.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            const double v = y[order[pos]];
            left_sum += v;
            left_sq += v * v;
            const double x_here = X[order[pos]][f];
            const double x_next = X[order[pos + 1]][f];
            if (x_here == x_next) continue;
            const std::size_t n_left = pos + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) {
                continue;
            }
            const double reduction =
                parent_sse -
                sse_of(left_sum, left_sq, static_cast<double>(n_left)) -
                sse_of(total - left_sum, total_sq - left_sq,
                       static_cast<double>(n_right));
            if (!best.found || reduction > best.reduction) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (x_here + x_next);
                best.reduction = reduction;
            }
        }
    }
    return best;
}

}  // namespace

std::int32_t RegressionTree::grow(std::span<const FeatureRow> X,
                                  std::span<const double> y,
                                  std::vector<std::size_t>& idx,
                                  std::size_t lo, std::size_t hi,
                                  std::size_t min_samples_leaf) {
    const std::size_t n = hi - lo;
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += y[idx[i]];
    mean /= static_cast<double>(n);

    auto make_leaf = [&]() {
        Node leaf;
        leaf.value = mean;
        nodes_.push_back(leaf);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    };

    if (n < 2 * min_samples_leaf || n < 2) return make_leaf();
    bool constant_y = true;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        if (y[idx[i]] != y[idx[lo]]) {
            constant_y = false;
            break;
        }
    }
    if (constant_y) return make_leaf();

    const auto choice = best_split(
        X, y, std::span<const std::size_t>(idx).subspan(lo, n),
        min_samples_leaf);
    if (!choice.found) return make_leaf();

    const auto mid_it = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(lo),
        idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t i) {
            return X[i][choice.feature] <= choice.threshold;
        });
    const auto mid = static_cast<std::size_t>(mid_it - idx.begin());

    Node node;
    node.feature = static_cast<std::int32_t>(choice.feature);
    node.threshold = choice.threshold;
    node.value = mean;
    nodes_.push_back(node);
    const auto self = static_cast<std::int32_t>(nodes_.size() - 1);
    const auto left = grow(X, y, idx, lo, mid, min_samples_leaf);
    const auto right = grow(X, y, idx, mid, hi, min_samples_leaf);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

void RegressionTree::fit(std::span<const FeatureRow> X,
                         std::span<const double> y,
                         std::vector<std::size_t> indices,
                         std::size_t min_samples_leaf) {
    nodes_.clear();
    if (indices.empty()) throw EmptyInput("RegressionTree::fit");
    grow(X, y, indices, 0, indices.size(), min_samples_leaf);
}

double RegressionTree::predict(const FeatureRow& row) const {
    std::size_t at = 0;
    while (true) {
        const Node& node = nodes_[at];
        if (node.feature < 0) return node.value;
        at = static_cast<std::size_t>(
            row[static_cast<std::size_t>(node.feature)] <= node.threshold
                ? node.left
                : node.right);
    }
}

void RandomForest::fit(std::span<const FeatureRow> X,
                       std::span<const double> y, const RfrConfig& cfg,
                       std::uint64_t root_seed) {
    if (X.empty()) throw EmptyInput("RandomForest::fit");
    if (X.size() != y.size()) {
        throw LengthMismatch("RandomForest::fit: " + std::to_string(X.size()) +
                             " rows vs " + std::to_string(y.size()) +
                             " targets");
    }
    if (cfg.n_trees == 0) throw InvalidConfig("n_trees must be >= 1");
    if (cfg.min_samples_leaf == 0) {
        throw InvalidConfig("min_samples_leaf must be >= 1");
    }
    for (const auto& r : X) {
        for (double v : r) {
            if (!std::isfinite(v)) throw NonFiniteInput("forest feature");
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw NonFiniteInput("forest target");
    }

    cfg_ = cfg;
    trees_.assign(cfg.n_trees, {});
    const std::size_t n = X.size();
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        std::vector<std::size_t> idx;
        idx.reserve(n);
        if (cfg.bootstrap) {
            Rng rng(root_seed + t);
            for (std::size_t i = 0; i < n; ++i) {
                idx.push_back(static_cast<std::size_t>(rng.below(n)));
            }
        } else {
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0);
        }
        trees_[t].fit(X, y, std::move(idx), cfg.min_samples_leaf);
    }
}

double RandomForest::predict(const FeatureRow& row) const {
    if (trees_.empty()) throw EmptyInput("RandomForest::predict before fit");
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(row);
    return sum / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict(
    std::span<const FeatureRow> rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(predict(r));
    return out;
}

}  // namespace aircal
