#include "aircal/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "aircal/errors.hpp"

namespace aircal::nn {

void Layer::zero_grads() {
    std::fill(grads_.begin(), grads_.end(), 0.0);
}

namespace {

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void glorot_fill(std::vector<double>& w, std::size_t begin, std::size_t end,
                 double limit, Rng& rng) {
    for (std::size_t i = begin; i < end; ++i) {
        w[i] = rng.uniform(-limit, limit);
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Conv1d::Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
               std::size_t dilation, Rng& init)
    : in_(in_ch), out_(out_ch), k_(kernel), dil_(dilation),
      left_(((kernel - 1) * dilation) / 2) {
    const std::size_t n_w = out_ * in_ * k_;
    params_.assign(n_w + out_, 0.0);
    grads_.assign(params_.size(), 0.0);
    glorot_fill(params_, 0, n_w, glorot_limit(in_ * k_, out_ * k_), init);
}

Tensor Conv1d::forward(const Tensor& x) {
    x_ = x;
    Tensor y(x.batch, x.len, out_);
    const std::size_t bias_at = out_ * in_ * k_;
    for (std::size_t b = 0; b < x.batch; ++b) {
        for (std::size_t t = 0; t < x.len; ++t) {
            for (std::size_t o = 0; o < out_; ++o) {
                double acc = params_[bias_at + o];
                for (std::size_t k = 0; k < k_; ++k) {
                    const std::ptrdiff_t src =
                        static_cast<std::ptrdiff_t>(t + k * dil_) -
                        static_cast<std::ptrdiff_t>(left_);
                    if (src < 0 ||
                        src >= static_cast<std::ptrdiff_t>(x.len)) {
                        continue;
                    }
                    const std::size_t base = (o * in_) * k_ + k;
                    for (std::size_t i = 0; i < in_; ++i) {
                        acc += params_[base + i * k_] *
                               x.at(b, static_cast<std::size_t>(src), i);
                    }
                }
                y.at(b, t, o) = acc;
            }
        }
    }
    return y;
}

Tensor Conv1d::backward(const Tensor& g) {
    Tensor dx(x_.batch, x_.len, in_);
    const std::size_t bias_at = out_ * in_ * k_;
    for (std::size_t b = 0; b < x_.batch; ++b) {
        for (std::size_t t = 0; t < x_.len; ++t) {
            for (std::size_t o = 0; o < out_; ++o) {
                const double go = g.at(b, t, o);
                if (go == 0.0) continue;
                grads_[bias_at + o] += go;
                for (std::size_t k = 0; k < k_; ++k) {
                    const std::ptrdiff_t src =
                        static_cast<std::ptrdiff_t>(t + k * dil_) -
                        static_cast<std::ptrdiff_t>(left_);
                    if (src < 0 ||
                        src >= static_cast<std::ptrdiff_t>(x_.len)) {
                        continue;
                    }
                    const auto s = static_cast<std::size_t>(src);
                    const std::size_t base = (o * in_) * k_ + k;
                    for (std::size_t i = 0; i < in_; ++i) {
                        grads_[base + i * k_] += go * x_.at(b, s, i);
                        dx.at(b, s, i) += go * params_[base + i * k_];
                    }
                }
            }
        }
    }
    return dx;
}

Tensor Relu::forward(const Tensor& x) {
    x_ = x;
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor Relu::backward(const Tensor& g) {
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
        if (x_.data[i] <= 0.0) dx.data[i] = 0.0;
    }
    return dx;
}

Dense::Dense(std::size_t in_features, Rng& init) : in_(in_features) {
    params_.assign(in_ + 1, 0.0);
    grads_.assign(params_.size(), 0.0);
    glorot_fill(params_, 0, in_, glorot_limit(in_, 1), init);
}

Tensor Dense::forward(const Tensor& x) {
    if (x.len * x.ch != in_) {
        throw LengthMismatch("Dense expects " + std::to_string(in_) +
                             " inputs, got " + std::to_string(x.len * x.ch));
    }
    x_ = x;
    Tensor y(x.batch, 1, 1);
    for (std::size_t b = 0; b < x.batch; ++b) {
        double acc = params_[in_];
        const double* row = x.data.data() + b * in_;
        for (std::size_t j = 0; j < in_; ++j) acc += params_[j] * row[j];
        y.at(b, 0, 0) = acc;
    }
    return y;
}

Tensor Dense::backward(const Tensor& g) {
    Tensor dx(x_.batch, x_.len, x_.ch);
    for (std::size_t b = 0; b < x_.batch; ++b) {
        const double gb = g.at(b, 0, 0);
        grads_[in_] += gb;
        const double* row = x_.data.data() + b * in_;
        double* drow = dx.data.data() + b * in_;
        for (std::size_t j = 0; j < in_; ++j) {
            grads_[j] += gb * row[j];
            drow[j] = gb * params_[j];
        }
    }
    return dx;
}

Lstm::Lstm(std::size_t in_ch, std::size_t hidden, bool return_sequences,
           Rng& init)
    : in_(in_ch), h_(hidden), return_sequences_(return_sequences) {
    const std::size_t n_w = 4 * h_ * in_;
    const std::size_t n_u = 4 * h_ * h_;
    params_.assign(n_w + n_u + 4 * h_, 0.0);
    grads_.assign(params_.size(), 0.0);
    glorot_fill(params_, 0, n_w, glorot_limit(in_, 4 * h_), init);
    glorot_fill(params_, n_w, n_w + n_u, glorot_limit(h_, 4 * h_), init);
    for (std::size_t j = 0; j < h_; ++j) params_[b_idx(1, j)] = 1.0;
}

std::size_t Lstm::w_idx(std::size_t gate, std::size_t j,
                        std::size_t i) const {
    return (gate * h_ + j) * in_ + i;
}

std::size_t Lstm::u_idx(std::size_t gate, std::size_t j,
                        std::size_t k) const {
    return 4 * h_ * in_ + (gate * h_ + j) * h_ + k;
}

std::size_t Lstm::b_idx(std::size_t gate, std::size_t j) const {
    return 4 * h_ * in_ + 4 * h_ * h_ + gate * h_ + j;
}

double Lstm::w(std::size_t gate, std::size_t j, std::size_t i) const {
    return params_[w_idx(gate, j, i)];
}

double Lstm::u(std::size_t gate, std::size_t j, std::size_t k) const {
    return params_[u_idx(gate, j, k)];
}

Tensor Lstm::forward(const Tensor& x) {
    x_ = x;
    const std::size_t batch = x.batch;
    const std::size_t len = x.len;
    gi_ = Tensor(batch, len, h_);
    gf_ = Tensor(batch, len, h_);
    gg_ = Tensor(batch, len, h_);
    go_ = Tensor(batch, len, h_);
    c_ = Tensor(batch, len, h_);
    tanh_c_ = Tensor(batch, len, h_);
    hseq_ = Tensor(batch, len, h_);

    std::vector<double> pre(4 * h_);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < len; ++t) {
            for (std::size_t gj = 0; gj < 4 * h_; ++gj) {
                const std::size_t gate = gj / h_;
                const std::size_t j = gj % h_;
                double acc = params_[b_idx(gate, j)];
                for (std::size_t i = 0; i < in_; ++i) {
                    acc += w(gate, j, i) * x.at(b, t, i);
                }
                if (t > 0) {
                    for (std::size_t k = 0; k < h_; ++k) {
                        acc += u(gate, j, k) * hseq_.at(b, t - 1, k);
                    }
                }
                pre[gj] = acc;
            }
            for (std::size_t j = 0; j < h_; ++j) {
                const double iv = sigmoid(pre[j]);
                const double fv = sigmoid(pre[h_ + j]);
                const double gv = std::tanh(pre[2 * h_ + j]);
                const double ov = sigmoid(pre[3 * h_ + j]);
                const double c_prev = t > 0 ? c_.at(b, t - 1, j) : 0.0;
                const double cv = fv * c_prev + iv * gv;
                const double tc = std::tanh(cv);
                gi_.at(b, t, j) = iv;
                gf_.at(b, t, j) = fv;
                gg_.at(b, t, j) = gv;
                go_.at(b, t, j) = ov;
                c_.at(b, t, j) = cv;
                tanh_c_.at(b, t, j) = tc;
                hseq_.at(b, t, j) = ov * tc;
            }
        }
    }
    if (return_sequences_) return hseq_;
    Tensor last(batch, 1, h_);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < h_; ++j) {
            last.at(b, 0, j) = hseq_.at(b, len - 1, j);
        }
    }
    return last;
}

Tensor Lstm::backward(const Tensor& g) {
    const std::size_t batch = x_.batch;
    const std::size_t len = x_.len;
    Tensor dx(batch, len, in_);
    std::vector<double> dh(h_);
    std::vector<double> dc(h_);
    std::vector<double> dpre(4 * h_);
    for (std::size_t b = 0; b < batch; ++b) {
        std::fill(dh.begin(), dh.end(), 0.0);
        std::fill(dc.begin(), dc.end(), 0.0);
        for (std::size_t t = len; t-- > 0;) {
            if (return_sequences_) {
                for (std::size_t j = 0; j < h_; ++j) dh[j] += g.at(b, t, j);
            } else if (t == len - 1) {
                for (std::size_t j = 0; j < h_; ++j) dh[j] += g.at(b, 0, j);
            }
            for (std::size_t j = 0; j < h_; ++j) {
                const double iv = gi_.at(b, t, j);
                const double fv = gf_.at(b, t, j);
                const double gv = gg_.at(b, t, j);
                const double ov = go_.at(b, t, j);
                const double tc = tanh_c_.at(b, t, j);
                const double c_prev = t > 0 ? c_.at(b, t - 1, j) : 0.0;
                const double do_v = dh[j] * tc;
                const double dc_v = dc[j] + dh[j] * ov * (1.0 - tc * tc);
                const double di = dc_v * gv;
                const double dg = dc_v * iv;
                const double df = dc_v * c_prev;
                dc[j] = dc_v * fv;  // carries to t-1
                dpre[j] = di * iv * (1.0 - iv);
                dpre[h_ + j] = df * fv * (1.0 - fv);
                dpre[2 * h_ + j] = dg * (1.0 - gv * gv);
                dpre[3 * h_ + j] = do_v * ov * (1.0 - ov);
            }
            std::fill(dh.begin(), dh.end(), 0.0);
            for (std::size_t gate = 0; gate < 4; ++gate) {
                for (std::size_t j = 0; j < h_; ++j) {
                    const double dp = dpre[gate * h_ + j];
                    if (dp == 0.0) continue;
                    grads_[b_idx(gate, j)] += dp;
                    for (std::size_t i = 0; i < in_; ++i) {
                        grads_[w_idx(gate, j, i)] += dp * x_.at(b, t, i);
                        dx.at(b, t, i) += dp * w(gate, j, i);
                    }
                    if (t > 0) {
                        for (std::size_t k = 0; k < h_; ++k) {
                            grads_[u_idx(gate, j, k)] +=
                                dp * hseq_.at(b, t - 1, k);
                            dh[k] += dp * u(gate, j, k);
                        }
                    }
                }
            }
        }
    }
    return dx;
}

void Network::add(std::unique_ptr<Layer> layer) {
    layers_.push_back(std::move(layer));
}

Tensor Network::forward(const Tensor& x) {
    Tensor cur = x;
    for (auto& l : layers_) cur = l->forward(cur);
    return cur;
}

void Network::backward(const Tensor& grad_out) {
    Tensor cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        cur = (*it)->backward(cur);
    }
}

void Network::zero_grads() {
    for (auto& l : layers_) l->zero_grads();
}

std::size_t Network::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l->params().size();
    return n;
}

double Network::param(std::size_t flat_idx) const {
    for (const auto& l : layers_) {
        if (flat_idx < l->params().size()) return l->params()[flat_idx];
        flat_idx -= l->params().size();
    }
    throw InvalidConfig("parameter index out of range");
}

void Network::set_param(std::size_t flat_idx, double v) {
    for (auto& l : layers_) {
        if (flat_idx < l->params().size()) {
            l->params()[flat_idx] = v;
            return;
        }
        flat_idx -= l->params().size();
    }
    throw InvalidConfig("parameter index out of range");
}

double Network::grad(std::size_t flat_idx) const {
    for (const auto& l : layers_) {
        if (flat_idx < l->params().size()) {
            return std::as_const(*l).grads()[flat_idx];
        }
        flat_idx -= l->params().size();
    }
    throw InvalidConfig("gradient index out of range");
}

std::vector<double> Network::flat_params() const {
    std::vector<double> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
        out.insert(out.end(), l->params().begin(), l->params().end());
    }
    return out;
}

void Network::set_flat_params(std::span<const double> values) {
    if (values.size() != param_count()) {
        throw LengthMismatch("set_flat_params: " +
                             std::to_string(values.size()) + " vs " +
                             std::to_string(param_count()));
    }
    std::size_t at = 0;
    for (auto& l : layers_) {
        std::copy(values.begin() + static_cast<std::ptrdiff_t>(at),
                  values.begin() +
                      static_cast<std::ptrdiff_t>(at + l->params().size()),
                  l->params().begin());
        at += l->params().size();
    }
}

double mse_loss(const Tensor& pred, std::span<const double> targets,
                Tensor& grad) {
    const double n = static_cast<double>(pred.batch);
    grad = Tensor(pred.batch, 1, 1);
    double loss = 0.0;
    for (std::size_t b = 0; b < pred.batch; ++b) {
        const double d = pred.at(b, 0, 0) - targets[b];
        loss += d * d;
        grad.at(b, 0, 0) = 2.0 * d / n;
    }
    return loss / n;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(Network& net) {
    const std::size_t n = net.param_count();
    if (m_.size() != n) {
        m_.assign(n, 0.0);
        v_.assign(n, 0.0);
        t_ = 0;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    std::size_t at = 0;
    for (auto& l : net.layers()) {
        auto& p = l->params();
        auto& g = l->grads();
        for (std::size_t i = 0; i < p.size(); ++i, ++at) {
            m_[at] = b1_ * m_[at] + (1.0 - b1_) * g[i];
            v_[at] = b2_ * v_[at] + (1.0 - b2_) * g[i] * g[i];
            const double mhat = m_[at] / bc1;
            const double vhat = v_[at] / bc2;
            p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

ClippedSgd::ClippedSgd(double lr, double clip_norm)
    : lr_(lr), clip_(clip_norm) {}

void ClippedSgd::step(Network& net) {
    double norm_sq = 0.0;
    for (auto& l : net.layers()) {
        for (double g : l->grads()) norm_sq += g * g;
    }
    double scale = 1.0;
    const double norm = std::sqrt(norm_sq);
    if (clip_ > 0.0 && norm > clip_) scale = clip_ / norm;
    for (auto& l : net.layers()) {
        auto& p = l->params();
        auto& g = l->grads();
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] -= lr_ * scale * g[i];
        }
    }
}

Network build_cnn(const CnnConfig& cfg, std::uint64_t init_seed) {
    if (cfg.filters == 0 || cfg.kernel_size == 0 || cfg.dilations.empty()) {
        throw InvalidConfig("cnn layer shape");
    }
    Rng init(init_seed);
    Network net;
    std::size_t ch = 1;
    for (std::size_t d : cfg.dilations) {
        net.add(std::make_unique<Conv1d>(ch, cfg.filters, cfg.kernel_size, d,
                                         init));
        net.add(std::make_unique<Relu>());
        ch = cfg.filters;
    }
    net.add(std::make_unique<Dense>(kWindowValues * cfg.filters, init));
    return net;
}

Network build_cnn_lstm(const CnnLstmConfig& cfg, std::uint64_t init_seed) {
    if (cfg.conv_filters == 0 || cfg.kernel_size == 0 || cfg.lstm_units == 0) {
        throw InvalidConfig("cnn_lstm layer shape");
    }
    Rng init(init_seed);
    Network net;
    net.add(std::make_unique<Conv1d>(1, cfg.conv_filters, cfg.kernel_size, 1,
                                     init));
    net.add(std::make_unique<Relu>());
    net.add(std::make_unique<Lstm>(cfg.conv_filters, cfg.lstm_units, true,
                                   init));
    net.add(std::make_unique<Lstm>(cfg.lstm_units, cfg.lstm_units, false,
                                   init));
    net.add(std::make_unique<Dense>(cfg.lstm_units, init));
    return net;
}

Tensor rows_to_tensor(std::span<const FeatureRow> rows) {
    Tensor t(rows.size(), kWindowValues, 1);
    for (std::size_t b = 0; b < rows.size(); ++b) {
        for (std::size_t i = 0; i < kWindowValues; ++i) {
            t.at(b, i, 0) = rows[b][i];
        }
    }
    return t;
}

namespace {

double validation_mae(Network& net, std::span<const FeatureRow> x,
                      std::span<const double> y, std::size_t chunk) {
    double abs_sum = 0.0;
    for (std::size_t at = 0; at < x.size(); at += chunk) {
        const std::size_t n = std::min(chunk, x.size() - at);
        const Tensor pred = net.forward(rows_to_tensor(x.subspan(at, n)));
        for (std::size_t b = 0; b < n; ++b) {
            abs_sum += std::fabs(pred.at(b, 0, 0) - y[at + b]);
        }
    }
    return abs_sum / static_cast<double>(x.size());
}

}  // namespace

FitResult fit_network(Network& net, Optimizer& opt,
                      std::span<const FeatureRow> x_train,
                      std::span<const double> y_train,
                      std::span<const FeatureRow> x_val,
                      std::span<const double> y_val, const FitOptions& opts,
                      Rng& shuffle_rng) {
    if (x_train.empty() || x_val.empty()) throw EmptyInput("fit_network");
    if (opts.batch_size == 0) throw InvalidConfig("batch_size must be >= 1");

    FitResult res;
    res.best_val_mae = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = net.flat_params();
    std::vector<std::size_t> order(x_train.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < opts.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t at = 0; at < order.size(); at += opts.batch_size) {
            const std::size_t n = std::min(opts.batch_size, order.size() - at);
            std::vector<FeatureRow> xb(n);
            std::vector<double> yb(n);
            for (std::size_t i = 0; i < n; ++i) {
                xb[i] = x_train[order[at + i]];
                yb[i] = y_train[order[at + i]];
            }
            const Tensor pred = net.forward(rows_to_tensor(xb));
            Tensor grad;
            const double loss = mse_loss(pred, yb, grad);
            if (!std::isfinite(loss)) {
                throw NonFiniteLoss("epoch " + std::to_string(epoch + 1));
            }
            net.zero_grads();
            net.backward(grad);
            opt.step(net);
        }
        const double val = validation_mae(net, x_val, y_val, 256);
        res.val_mae_history.push_back(val);
        res.epochs_run = epoch + 1;
        if (val < res.best_val_mae) {
            res.best_val_mae = val;
            res.best_epoch = epoch + 1;
            best_params = net.flat_params();
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= opts.patience) {
                res.early_stopped = true;
                break;
            }
        }
    }
    net.set_flat_params(best_params);
    return res;
}

std::vector<double> predict_network(Network& net,
                                    std::span<const FeatureRow> rows,
                                    std::size_t chunk) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t at = 0; at < rows.size(); at += chunk) {
        const std::size_t n = std::min(chunk, rows.size() - at);
        const Tensor pred = net.forward(rows_to_tensor(rows.subspan(at, n)));
        for (std::size_t b = 0; b < n; ++b) out.push_back(pred.at(b, 0, 0));
    }
    return out;
}

double finite_difference_check(Network& net, const Tensor& x,
                               std::span<const double> targets,
                               std::size_t sample_params, double eps,
                               std::uint64_t seed) {
    Tensor grad;
    const Tensor pred = net.forward(x);
    mse_loss(pred, targets, grad);
    net.zero_grads();
    net.backward(grad);
    const std::size_t total = net.param_count();
    std::vector<double> analytic(total);
    for (std::size_t i = 0; i < total; ++i) analytic[i] = net.grad(i);

    std::vector<std::size_t> picks(total);
    std::iota(picks.begin(), picks.end(), 0);
    if (sample_params < total) {
        Rng rng(seed);
        for (std::size_t i = 0; i < sample_params; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.below(total - i));
            std::swap(picks[i], picks[j]);
        }
        picks.resize(sample_params);
    }

    auto loss_at = [&]() {
        Tensor g;
        return mse_loss(net.forward(x), targets, g);
    };
    double worst = 0.0;
    for (std::size_t p : picks) {
        const double saved = net.param(p);
        net.set_param(p, saved + eps);
        const double up = loss_at();
        net.set_param(p, saved - eps);
        const double down = loss_at();
        net.set_param(p, saved);
        const double fd = (up - down) / (2.0 * eps);
        const double denom =
            std::max(std::fabs(analytic[p]) + std::fabs(fd), 1e-6);
        worst = std::max(worst, std::fabs(analytic[p] - fd) / denom);
    }
    return worst;
}

}  // namespace aircal::nn
