#include "aircal/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aircal/errors.hpp"
#include "aircal/rng.hpp"

namespace aircal {

double rbf_kernel(const FeatureRow& a, const FeatureRow& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < kWindowValues; ++c) {
        const double d = a[c] - b[c];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Feasible range for the bias implied by one sample's beta status.
void bias_interval(double beta, double f, double c, double eps, double& lo,
                   double& hi) {
    if (beta == 0.0) {
        lo = f - eps;
        hi = f + eps;
    } else if (beta > 0.0 && beta < c) {
        lo = f - eps;
        hi = f - eps;
    } else if (beta == c) {
        lo = -kInf;
        hi = f - eps;
    } else if (beta < 0.0 && beta > -c) {
        lo = f + eps;
        hi = f + eps;
    } else {  // beta == -c
        lo = f + eps;
        hi = kInf;
    }
}

double gamma_scale(std::span<const FeatureRow> X) {
    double sum = 0.0;
    double sum_sq = 0.0;
    const double n = static_cast<double>(X.size() * kWindowValues);
    for (const auto& r : X) {
        for (double v : r) {
            sum += v;
            sum_sq += v * v;
        }
    }
    const double var = sum_sq / n - (sum / n) * (sum / n);
    if (var <= 0.0) return 1.0 / static_cast<double>(kWindowValues);
    return 1.0 / (static_cast<double>(kWindowValues) * var);
}

// Kernel access: dense matrix when it fits, recomputed rows otherwise.
class KernelSource {
public:
    KernelSource(std::span<const FeatureRow> X, double gamma)
        : X_(X), gamma_(gamma), n_(X.size()) {
        if (n_ <= 4096) {
            dense_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = i; j < n_; ++j) {
                    const double k = rbf_kernel(X_[i], X_[j], gamma_);
                    dense_[i * n_ + j] = k;
                    dense_[j * n_ + i] = k;
                }
            }
        } else {
            row_a_.resize(n_);
            row_b_.resize(n_);
        }
    }

    const double* row(std::size_t i, bool second) {
        if (!dense_.empty()) return dense_.data() + i * n_;
        auto& buf = second ? row_b_ : row_a_;
        auto& tag = second ? tag_b_ : tag_a_;
        if (tag != static_cast<std::ptrdiff_t>(i)) {
            for (std::size_t j = 0; j < n_; ++j) {
                buf[j] = rbf_kernel(X_[i], X_[j], gamma_);
            }
            tag = static_cast<std::ptrdiff_t>(i);
        }
        return buf.data();
    }

private:
    std::span<const FeatureRow> X_;
    double gamma_;
    std::size_t n_;
    std::vector<double> dense_;
    std::vector<double> row_a_, row_b_;
    std::ptrdiff_t tag_a_ = -1, tag_b_ = -1;
};

}  // namespace

void Svr::fit(std::span<const FeatureRow> X, std::span<const double> y,
              const SvrConfig& cfg, std::uint64_t seed) {
    if (X.empty()) throw EmptyInput("Svr::fit");
    if (X.size() != y.size()) {
        throw LengthMismatch("Svr::fit: " + std::to_string(X.size()) +
                             " rows vs " + std::to_string(y.size()) +
                             " targets");
    }
    if (X.size() < 2) throw TooFewSamples("Svr::fit needs n >= 2");
    if (cfg.C <= 0.0) throw InvalidConfig("SVR C must be > 0");
    if (cfg.epsilon < 0.0) throw InvalidConfig("SVR epsilon must be >= 0");
    if (cfg.tol <= 0.0) throw InvalidConfig("SVR tol must be > 0");
    for (const auto& r : X) {
        for (double v : r) {
            if (!std::isfinite(v)) throw NonFiniteInput("Svr::fit feature");
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw NonFiniteInput("Svr::fit target");
    }

    cfg_ = cfg;
    const std::size_t n = X.size();
    gamma_ = gamma_scale(X);
    KernelSource kernel(X, gamma_);
    std::vector<double> beta(n, 0.0);
    std::vector<double> g(n, 0.0);  // (K beta)_i, kept incrementally
    Rng rng(derive_seed(seed, "svr-stall"));

    const double c = cfg.C;
    const double eps = cfg.epsilon;
    converged_ = false;
    iterations_ = 0;

    double max_lo = 0.0;
    double min_hi = 0.0;
    std::size_t arg_lo = 0;
    std::size_t arg_hi = 0;
    auto scan = [&]() {
        max_lo = -kInf;
        min_hi = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = y[i] - g[i];
            double lo;
            double hi;
            bias_interval(beta[i], f, c, eps, lo, hi);
            if (lo > max_lo) {
                max_lo = lo;
                arg_lo = i;
            }
            if (hi < min_hi) {
                min_hi = hi;
                arg_hi = i;
            }
        }
    };

    // Exact minimizer of the pair subproblem in delta, where beta_i gains
    // delta and beta_j loses it. Returns the step and whether it makes
    // progress.
    auto pair_step = [&](std::size_t i, std::size_t j) -> bool {
        if (i == j) return false;
        const double* ki = kernel.row(i, false);
        const double* kj = kernel.row(j, true);
        const double eta = ki[i] + kj[j] - 2.0 * ki[j];
        const double fi = y[i] - g[i];
        const double fj = y[j] - g[j];
        const double lin = fj - fi;  // phi(delta) linear term
        const double d_lo = std::max(-c - beta[i], beta[j] - c);
        const double d_hi = std::min(c - beta[i], beta[j] + c);
        if (d_hi <= d_lo) return false;

        auto phi = [&](double d) {
            return 0.5 * eta * d * d + lin * d +
                   eps * (std::fabs(beta[i] + d) + std::fabs(beta[j] - d));
        };
        double best_d = 0.0;
        double best_phi = phi(0.0);
        auto consider = [&](double d) {
            if (d < d_lo || d > d_hi) return;
            const double p = phi(d);
            if (p < best_phi - 1e-15) {
                best_phi = p;
                best_d = d;
            }
        };
        consider(d_lo);
        consider(d_hi);
        consider(-beta[i]);
        consider(beta[j]);
        if (eta > 0.0) {
            for (const double si : {-1.0, 1.0}) {
                for (const double sj : {-1.0, 1.0}) {
                    consider((-lin - eps * si + eps * sj) / eta);
                }
            }
        }
        if (std::fabs(best_d) < 1e-14) return false;

        beta[i] += best_d;
        beta[j] -= best_d;
        // snap to the box so the KKT classification stays exact
        for (const std::size_t k : {i, j}) {
            if (std::fabs(beta[k]) < 1e-12) beta[k] = 0.0;
            if (std::fabs(beta[k] - c) < 1e-12) beta[k] = c;
            if (std::fabs(beta[k] + c) < 1e-12) beta[k] = -c;
        }
        for (std::size_t m = 0; m < n; ++m) {
            g[m] += best_d * (ki[m] - kj[m]);
        }
        return true;
    };

    while (iterations_ < cfg.max_iterations) {
        scan();
        if (max_lo - min_hi <= cfg.tol) {
            converged_ = true;
            break;
        }
        ++iterations_;
        if (!pair_step(arg_lo, arg_hi)) {
            // fp stall on the extreme pair: try a few random partners
            bool moved = false;
            for (int attempt = 0; attempt < 8 && !moved; ++attempt) {
                const auto other = static_cast<std::size_t>(rng.below(n));
                moved = pair_step(arg_lo, other) || pair_step(other, arg_hi);
            }
            if (!moved) break;
        }
    }
    if (!converged_) scan();
    if (max_lo == -kInf || min_hi == kInf) {
        bias_ = 0.0;
    } else {
        bias_ = 0.5 * (max_lo + min_hi);
    }

    sv_.clear();
    beta_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (beta[i] != 0.0) {
            sv_.push_back(X[i]);
            beta_.push_back(beta[i]);
        }
    }
    training_beta_ = std::move(beta);
}

double Svr::predict(const FeatureRow& row) const {
    double s = bias_;
    for (std::size_t i = 0; i < sv_.size(); ++i) {
        s += beta_[i] * rbf_kernel(sv_[i], row, gamma_);
    }
    return s;
}

std::vector<double> Svr::predict(std::span<const FeatureRow> rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(predict(r));
    return out;
}

double Svr::kkt_violation(std::span<const double> beta,
                          std::span<const FeatureRow> X,
                          std::span<const double> y, const SvrConfig& cfg,
                          double gamma) {
    if (X.size() != y.size() || X.size() != beta.size()) {
        throw LengthMismatch("kkt_violation");
    }
    if (X.empty()) throw EmptyInput("kkt_violation");
    double max_lo = -kInf;
    double min_hi = kInf;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double gi = 0.0;
        for (std::size_t j = 0; j < X.size(); ++j) {
            if (beta[j] != 0.0) gi += beta[j] * rbf_kernel(X[j], X[i], gamma);
        }
        const double f = y[i] - gi;
        double lo;
        double hi;
        bias_interval(beta[i], f, cfg.C, cfg.epsilon, lo, hi);
        max_lo = std::max(max_lo, lo);
        min_hi = std::min(min_hi, hi);
    }
    return max_lo - min_hi;
}

void Svr::set(std::vector<FeatureRow> sv, std::vector<double> beta,
              double bias, double gamma, bool converged,
              const SvrConfig& cfg) {
    sv_ = std::move(sv);
    beta_ = std::move(beta);
    bias_ = bias;
    gamma_ = gamma;
    converged_ = converged;
    cfg_ = cfg;
}

}  // namespace aircal
