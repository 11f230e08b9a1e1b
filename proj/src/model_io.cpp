#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aircal/atomic_file.hpp"
#include "aircal/errors.hpp"
#include "aircal/model.hpp"
#include "aircal/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian");

namespace aircal {

namespace {

constexpr char kMagic[13] = "AIRCAL-MODEL";  // 12 bytes on disk
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void bytes(const void* p, std::size_t n) { raw(p, n); }

    std::string finish() {
        const std::uint64_t sum = fnv1a(buf_.data(), buf_.size());
        raw(&sum, 8);
        return std::move(buf_);
    }

private:
    void raw(const void* p, std::size_t n) {
        buf_.append(static_cast<const char*>(p), n);
    }
    std::string buf_;
};

class Reader {
public:
    Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    std::int32_t i32() { return get<std::int32_t>(); }
    double f64() { return get<double>(); }
    void bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, data_ + at_, n);
        at_ += n;
    }
    bool exhausted() const { return at_ == size_; }

private:
    template <typename T>
    T get() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
    void need(std::size_t n) {
        if (at_ + n > size_) {
            throw CorruptPayload("model file truncated");
        }
    }
    const char* data_;
    std::size_t size_;
    std::size_t at_ = 0;
};

void write_config(Writer& w, const Model& m) {
    w.f64(m.config.validation_fraction);
    switch (m.kind) {
        case ModelKind::rfr: {
            const auto& c = m.config.rfr;
            w.u32(static_cast<std::uint32_t>(c.n_trees));
            w.u8(c.bootstrap ? 1 : 0);
            w.u32(static_cast<std::uint32_t>(c.min_samples_leaf));
            break;
        }
        case ModelKind::svr: {
            const auto& c = m.config.svr;
            w.f64(c.C);
            w.f64(c.epsilon);
            w.f64(c.tol);
            w.u64(c.max_iterations);
            break;
        }
        case ModelKind::cnn: {
            const auto& c = m.config.cnn;
            w.u32(static_cast<std::uint32_t>(c.filters));
            w.u32(static_cast<std::uint32_t>(c.kernel_size));
            w.u32(static_cast<std::uint32_t>(c.dilations.size()));
            for (std::size_t d : c.dilations) {
                w.u32(static_cast<std::uint32_t>(d));
            }
            w.f64(c.learning_rate);
            w.f64(c.beta1);
            w.f64(c.beta2);
            w.f64(c.adam_eps);
            w.u32(static_cast<std::uint32_t>(c.max_epochs));
            w.u32(static_cast<std::uint32_t>(c.patience));
            w.u32(static_cast<std::uint32_t>(c.batch_size));
            break;
        }
        case ModelKind::cnn_lstm: {
            const auto& c = m.config.cnn_lstm;
            w.u32(static_cast<std::uint32_t>(c.conv_filters));
            w.u32(static_cast<std::uint32_t>(c.kernel_size));
            w.u32(static_cast<std::uint32_t>(c.lstm_units));
            w.f64(c.learning_rate);
            w.f64(c.clip_norm);
            w.u32(static_cast<std::uint32_t>(c.max_epochs));
            w.u32(static_cast<std::uint32_t>(c.patience));
            w.u32(static_cast<std::uint32_t>(c.batch_size));
            break;
        }
    }
}

void read_config(Reader& r, Model& m) {
    m.config.kind = m.kind;
    m.config.validation_fraction = r.f64();
    switch (m.kind) {
        case ModelKind::rfr: {
            auto& c = m.config.rfr;
            c.n_trees = r.u32();
            c.bootstrap = r.u8() != 0;
            c.min_samples_leaf = r.u32();
            break;
        }
        case ModelKind::svr: {
            auto& c = m.config.svr;
            c.C = r.f64();
            c.epsilon = r.f64();
            c.tol = r.f64();
            c.max_iterations = r.u64();
            break;
        }
        case ModelKind::cnn: {
            auto& c = m.config.cnn;
            c.filters = r.u32();
            c.kernel_size = r.u32();
            const std::uint32_t nd = r.u32();
            if (nd == 0 || nd > 64) {
                throw CorruptPayload("implausible dilation count");
            }
            c.dilations.clear();
            for (std::uint32_t i = 0; i < nd; ++i) c.dilations.push_back(r.u32());
            c.learning_rate = r.f64();
            c.beta1 = r.f64();
            c.beta2 = r.f64();
            c.adam_eps = r.f64();
            c.max_epochs = r.u32();
            c.patience = r.u32();
            c.batch_size = r.u32();
            break;
        }
        case ModelKind::cnn_lstm: {
            auto& c = m.config.cnn_lstm;
            c.conv_filters = r.u32();
            c.kernel_size = r.u32();
            c.lstm_units = r.u32();
            c.learning_rate = r.f64();
            c.clip_norm = r.f64();
            c.max_epochs = r.u32();
            c.patience = r.u32();
            c.batch_size = r.u32();
            break;
        }
    }
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& file) {
    Writer w;
    w.bytes(kMagic, 12);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(model.kind));
    w.u64(model.meta.seed);
    w.u64(model.meta.data_fingerprint);
    w.f64(model.meta.validation_mae);
    w.u8(model.meta.converged ? 1 : 0);
    w.u32(model.meta.epochs_run);
    write_config(w, model);

    w.u8(model.scaler ? 1 : 0);
    if (model.scaler) {
        for (double v : model.scaler->feature_mean()) w.f64(v);
        for (double v : model.scaler->feature_std()) w.f64(v);
        w.f64(model.scaler->target_mean());
        w.f64(model.scaler->target_std());
    }

    switch (model.kind) {
        case ModelKind::rfr: {
            const auto& trees = model.forest->trees();
            w.u32(static_cast<std::uint32_t>(trees.size()));
            for (const auto& t : trees) {
                w.u32(static_cast<std::uint32_t>(t.nodes().size()));
                for (const auto& n : t.nodes()) {
                    w.i32(n.feature);
                    w.f64(n.threshold);
                    w.f64(n.value);
                    w.i32(n.left);
                    w.i32(n.right);
                }
            }
            break;
        }
        case ModelKind::svr: {
            w.f64(model.svr->gamma());
            w.f64(model.svr->bias());
            const auto& sv = model.svr->support_vectors();
            const auto& beta = model.svr->coefficients();
            w.u32(static_cast<std::uint32_t>(sv.size()));
            for (std::size_t i = 0; i < sv.size(); ++i) {
                for (double v : sv[i]) w.f64(v);
                w.f64(beta[i]);
            }
            break;
        }
        case ModelKind::cnn:
        case ModelKind::cnn_lstm: {
            const auto params = model.net->flat_params();
            w.u64(params.size());
            for (double v : params) w.f64(v);
            break;
        }
    }
    write_file_atomic(file, w.finish());
}

Model load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string blob = ss.str();
    if (blob.size() < 12 + 4 + 8) throw CorruptPayload("model file too short");

    if (std::memcmp(blob.data(), kMagic, 12) != 0) {
        throw CorruptPayload("bad model magic");
    }
    std::uint32_t version;
    std::memcpy(&version, blob.data() + 12, 4);
    if (version != kVersion) {
        throw FormatVersionMismatch("model format version " +
                                    std::to_string(version) +
                                    ", expected " + std::to_string(kVersion));
    }
    std::uint64_t stored_sum;
    std::memcpy(&stored_sum, blob.data() + blob.size() - 8, 8);
    if (fnv1a(blob.data(), blob.size() - 8) != stored_sum) {
        throw CorruptPayload("model checksum mismatch");
    }

    Reader r(blob.data() + 16, blob.size() - 16 - 8);
    Model m;
    const std::uint8_t kind_byte = r.u8();
    if (kind_byte < 1 || kind_byte > 4) {
        throw CorruptPayload("unknown model kind " +
                             std::to_string(kind_byte));
    }
    m.kind = static_cast<ModelKind>(kind_byte);
    m.meta.seed = r.u64();
    m.meta.data_fingerprint = r.u64();
    m.meta.validation_mae = r.f64();
    m.meta.converged = r.u8() != 0;
    m.meta.epochs_run = r.u32();
    m.config.seed = m.meta.seed;
    read_config(r, m);

    if (r.u8() != 0) {
        FeatureRow mean;
        FeatureRow std;
        for (double& v : mean) v = r.f64();
        for (double& v : std) v = r.f64();
        const double y_mean = r.f64();
        const double y_std = r.f64();
        Scaler s;
        s.set(mean, std, y_mean, y_std);
        m.scaler = s;
    }

    switch (m.kind) {
        case ModelKind::rfr: {
            RandomForest forest;
            forest.set_config(m.config.rfr);
            const std::uint32_t n_trees = r.u32();
            if (n_trees == 0 || n_trees > 100000) {
                throw CorruptPayload("implausible tree count");
            }
            forest.trees().resize(n_trees);
            for (auto& tree : forest.trees()) {
                const std::uint32_t n_nodes = r.u32();
                std::vector<RegressionTree::Node> nodes(n_nodes);
                for (auto& node : nodes) {
                    node.feature = r.i32();
                    node.threshold = r.f64();
                    node.value = r.f64();
                    node.left = r.i32();
                    node.right = r.i32();
                    if (node.feature >= static_cast<int>(kWindowValues)) {
                        throw CorruptPayload("node feature out of range");
                    }
                }
                tree.set_nodes(std::move(nodes));
            }
            m.forest = std::move(forest);
            break;
        }
        case ModelKind::svr: {
            const double gamma = r.f64();
            const double bias = r.f64();
            const std::uint32_t n_sv = r.u32();
            std::vector<FeatureRow> sv(n_sv);
            std::vector<double> beta(n_sv);
            for (std::uint32_t i = 0; i < n_sv; ++i) {
                for (double& v : sv[i]) v = r.f64();
                beta[i] = r.f64();
            }
            Svr s;
            s.set(std::move(sv), std::move(beta), bias, gamma,
                  m.meta.converged, m.config.svr);
            m.svr = std::move(s);
            break;
        }
        case ModelKind::cnn:
        case ModelKind::cnn_lstm: {
            nn::Network net =
                m.kind == ModelKind::cnn
                    ? nn::build_cnn(m.config.cnn, 0)
                    : nn::build_cnn_lstm(m.config.cnn_lstm, 0);
            const std::uint64_t n_params = r.u64();
            if (n_params != net.param_count()) {
                throw CorruptPayload("parameter count mismatch");
            }
            std::vector<double> params(n_params);
            for (double& v : params) v = r.f64();
            net.set_flat_params(params);
            m.net = std::move(net);
            break;
        }
    }
    if (!r.exhausted()) throw CorruptPayload("trailing bytes in model file");
    return m;
}

void write_file_atomic(const std::filesystem::path& file,
                       const std::string& content) {
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

}  // namespace aircal
