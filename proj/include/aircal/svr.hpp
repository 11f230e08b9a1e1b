#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aircal/scaler.hpp"

namespace aircal {

struct SvrConfig {
    double C = 1.0;
    double epsilon = 0.1;  // standardized target units
    double tol = 1e-3;
    std::size_t max_iterations = 200000;
};

// Epsilon-insensitive support vector regression with an RBF kernel, solved
// in the beta = alpha - alpha* formulation by pairwise coordinate steps on
// the most violating pair. Each step minimizes the dual restricted to the
// pair exactly (the restriction is a convex piecewise quadratic in the
// transferred amount; all kink/bound/stationary candidates are evaluated).
// Inputs are expected standardized; gamma follows the 1 / (d * var) rule
// computed from the training matrix.
class Svr {
public:
    void fit(std::span<const FeatureRow> X, std::span<const double> y,
             const SvrConfig& cfg, std::uint64_t seed = 0);

    double predict(const FeatureRow& row) const;
    std::vector<double> predict(std::span<const FeatureRow> rows) const;

    bool converged() const noexcept { return converged_; }
    std::size_t iterations() const noexcept { return iterations_; }
    double bias() const noexcept { return bias_; }
    double gamma() const noexcept { return gamma_; }
    const std::vector<FeatureRow>& support_vectors() const noexcept {
        return sv_;
    }
    const std::vector<double>& coefficients() const noexcept { return beta_; }
    const SvrConfig& config() const noexcept { return cfg_; }

    // Full dual vector over the training set (zeros included), retained by
    // fit so the solution can be audited. Empty on a deserialized model.
    const std::vector<double>& training_beta() const noexcept {
        return training_beta_;
    }

    // Recomputes every sample's feasible-bias interval from scratch for a
    // dual vector and reports max(lo) - min(hi); at an optimum this is
    // <= 0, and the solver stops once it is <= tol.
    static double kkt_violation(std::span<const double> beta,
                                std::span<const FeatureRow> X,
                                std::span<const double> y,
                                const SvrConfig& cfg, double gamma);

    void set(std::vector<FeatureRow> sv, std::vector<double> beta, double bias,
             double gamma, bool converged, const SvrConfig& cfg);

private:
    SvrConfig cfg_;
    std::vector<FeatureRow> sv_;
    std::vector<double> beta_;
    std::vector<double> training_beta_;
    double bias_ = 0.0;
    double gamma_ = 0.0;
    bool converged_ = false;
    std::size_t iterations_ = 0;
};

double rbf_kernel(const FeatureRow& a, const FeatureRow& b, double gamma);

}  // namespace aircal
