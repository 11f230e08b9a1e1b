#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "aircal/rng.hpp"
#include "aircal/scaler.hpp"

namespace aircal::nn {

// Dense row-major (batch, len, channels) block of doubles.
struct Tensor {
    std::size_t batch = 0;
    std::size_t len = 0;
    std::size_t ch = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t b, std::size_t l, std::size_t c)
        : batch(b), len(l), ch(c), data(b * l * c, 0.0) {}

    double& at(std::size_t b, std::size_t t, std::size_t c) {
        return data[(b * len + t) * ch + c];
    }
    double at(std::size_t b, std::size_t t, std::size_t c) const {
        return data[(b * len + t) * ch + c];
    }
};

// A differentiable stage. forward caches whatever the matching backward
// needs, so call them strictly in pairs. backward accumulates parameter
// gradients (zero_grads between steps) and returns the input gradient.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;

    std::vector<double>& params() noexcept { return params_; }
    const std::vector<double>& params() const noexcept { return params_; }
    std::vector<double>& grads() noexcept { return grads_; }
    const std::vector<double>& grads() const noexcept { return grads_; }
    void zero_grads();

protected:
    std::vector<double> params_;
    std::vector<double> grads_;
};

// 1D convolution with Keras-style "same" zero padding: for an effective
// kernel extent e = (k - 1) * dilation + 1 the input is padded by
// (e - 1) / 2 on the left (rounded down) and the rest on the right.
class Conv1d : public Layer {
public:
    Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
           std::size_t dilation, Rng& init);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::size_t in_, out_, k_, dil_, left_;
    Tensor x_;
};

class Relu : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Tensor x_;
};

// Flattens (len, ch) and maps to a single output.
class Dense : public Layer {
public:
    Dense(std::size_t in_features, Rng& init);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::size_t in_;
    Tensor x_;
};

// Standard LSTM (gates i, f, g, o; forget bias 1). Either returns the
// hidden sequence or only the final hidden state.
class Lstm : public Layer {
public:
    Lstm(std::size_t in_ch, std::size_t hidden, bool return_sequences,
         Rng& init);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    double w(std::size_t gate, std::size_t j, std::size_t i) const;
    double u(std::size_t gate, std::size_t j, std::size_t k) const;
    std::size_t w_idx(std::size_t gate, std::size_t j, std::size_t i) const;
    std::size_t u_idx(std::size_t gate, std::size_t j, std::size_t k) const;
    std::size_t b_idx(std::size_t gate, std::size_t j) const;

    std::size_t in_, h_;
    bool return_sequences_;
    Tensor x_;
    // per-timestep caches, each (batch, len, hidden)
    Tensor gi_, gf_, gg_, go_, c_, tanh_c_, hseq_;
};

class Network {
public:
    void add(std::unique_ptr<Layer> layer);
    Tensor forward(const Tensor& x);
    void backward(const Tensor& grad_out);
    void zero_grads();

    std::size_t param_count() const;
    double param(std::size_t flat_idx) const;
    void set_param(std::size_t flat_idx, double v);
    double grad(std::size_t flat_idx) const;
    std::vector<double> flat_params() const;
    void set_flat_params(std::span<const double> values);

    std::vector<std::unique_ptr<Layer>>& layers() noexcept { return layers_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Mean squared error over a (batch, 1, 1) prediction; fills the gradient
// tensor for backward.
double mse_loss(const Tensor& pred, std::span<const double> targets,
                Tensor& grad);

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(Network& net) = 0;
};

class Adam : public Optimizer {
public:
    Adam(double lr, double beta1, double beta2, double eps);
    void step(Network& net) override;

private:
    double lr_, b1_, b2_, eps_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

// Plain SGD with global gradient-norm clipping.
class ClippedSgd : public Optimizer {
public:
    ClippedSgd(double lr, double clip_norm);
    void step(Network& net) override;

private:
    double lr_, clip_;
};

struct CnnConfig {
    std::size_t filters = 32;
    std::size_t kernel_size = 2;
    std::vector<std::size_t> dilations = {1, 2, 4, 8, 16, 32};
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    std::size_t batch_size = 64;
};

struct CnnLstmConfig {
    std::size_t conv_filters = 32;
    std::size_t kernel_size = 2;
    std::size_t lstm_units = 32;
    double learning_rate = 1e-2;
    double clip_norm = 1.0;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    std::size_t batch_size = 64;
};

Network build_cnn(const CnnConfig& cfg, std::uint64_t init_seed);
Network build_cnn_lstm(const CnnLstmConfig& cfg, std::uint64_t init_seed);

Tensor rows_to_tensor(std::span<const FeatureRow> rows);

struct FitOptions {
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    std::size_t batch_size = 64;
};

struct FitResult {
    double best_val_mae = 0.0;  // same units as the targets
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
    std::vector<double> val_mae_history;
};

// Mini-batch training with per-epoch validation MAE, patience-based early
// stopping and best-weights restore. Throws NonFiniteLoss if a batch loss
// leaves the reals.
FitResult fit_network(Network& net, Optimizer& opt,
                      std::span<const FeatureRow> x_train,
                      std::span<const double> y_train,
                      std::span<const FeatureRow> x_val,
                      std::span<const double> y_val, const FitOptions& opts,
                      Rng& shuffle_rng);

std::vector<double> predict_network(Network& net,
                                    std::span<const FeatureRow> rows,
                                    std::size_t chunk = 256);

// Central-difference audit of the analytic gradients on one batch: builds
// the loss at theta +/- eps per sampled parameter and reports the largest
// relative error against backward's gradient.
double finite_difference_check(Network& net, const Tensor& x,
                               std::span<const double> targets,
                               std::size_t sample_params, double eps,
                               std::uint64_t seed);

}  // namespace aircal::nn
