#include "aircal/synth.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string>

#include "aircal/errors.hpp"
#include "aircal/rng.hpp"

namespace aircal {

double SineTrajectory::at(double elapsed_s) const {
    if (amplitude == 0.0) return mean;
    return mean +
           amplitude * std::sin(2.0 * std::numbers::pi * elapsed_s / period_s +
                                phase_rad);
}

namespace {

void validate(const TruthGenConfig& c) {
    if (c.interval_s <= 0) throw InvalidConfig("truth interval_s must be > 0");
    if (c.n_points == 0) throw InvalidConfig("truth n_points must be > 0");
    if (std::fabs(c.ar1_phi) >= 1.0) {
        throw InvalidConfig("ar1_phi must lie in (-1, 1)");
    }
    if (c.ar1_sigma_ppm < 0.0) throw InvalidConfig("ar1_sigma_ppm < 0");
    if (c.diurnal_period_s <= 0.0) throw InvalidConfig("diurnal_period_s <= 0");
}

void validate(const SensorGenConfig& c) {
    if (c.interval_s <= 0) throw InvalidConfig("sensor interval_s must be > 0");
    if (c.gain <= 0.0) throw InvalidConfig("gain must be > 0");
    if (c.dropout_prob < 0.0 || c.dropout_prob > 1.0) {
        throw InvalidConfig("dropout_prob must lie in [0, 1]");
    }
    if (c.noise_base_ppm < 0.0 || c.noise_frac < 0.0) {
        throw InvalidConfig("noise terms must be >= 0");
    }
    if (c.drift_tau_days <= 0.0) throw InvalidConfig("drift_tau_days <= 0");
    if (c.temperature.period_s <= 0.0 || c.pressure_ratio.period_s <= 0.0 ||
        c.humidity.period_s <= 0.0) {
        throw InvalidConfig("trajectory period_s <= 0");
    }
}

}  // namespace

Series generate_truth(const TruthGenConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    Series out;
    out.label = "truth";
    out.points.reserve(cfg.n_points);
    double ar = 0.0;
    if (cfg.ar1_sigma_ppm > 0.0) {
        const double stationary_sd =
            cfg.ar1_sigma_ppm / std::sqrt(1.0 - cfg.ar1_phi * cfg.ar1_phi);
        ar = rng.normal(0.0, stationary_sd);
    }
    for (std::size_t i = 0; i < cfg.n_points; ++i) {
        const std::int64_t t =
            cfg.start_epoch_s + static_cast<std::int64_t>(i) * cfg.interval_s;
        const double elapsed = static_cast<double>(t - cfg.start_epoch_s);
        const double diurnal =
            cfg.diurnal_amplitude_ppm *
            std::sin(2.0 * std::numbers::pi * elapsed / cfg.diurnal_period_s +
                     cfg.diurnal_phase_rad);
        out.points.push_back({t, cfg.baseline_ppm + diurnal + ar});
        if (i + 1 < cfg.n_points) {
            ar = cfg.ar1_phi * ar +
                 (cfg.ar1_sigma_ppm > 0.0
                      ? rng.normal(0.0, cfg.ar1_sigma_ppm)
                      : 0.0);
        }
    }
    return out;
}

Series generate_sensor(const Series& truth, const SensorGenConfig& cfg) {
    validate(cfg);
    if (truth.empty()) throw EmptySeries("generate_sensor needs truth data");
    if (!truth.is_time_ordered()) {
        throw InvalidValue("truth series is not time ordered", 0);
    }
    Rng rng(cfg.seed);
    Series out;
    out.label = "sensor";
    const std::int64_t t0 = truth.points.front().epoch_s;
    const std::int64_t t_end = truth.points.back().epoch_s;
    std::size_t seg = 0;  // truth segment cursor, advances with the tick
    for (std::int64_t t = t0; t <= t_end; t += cfg.interval_s) {
        if (cfg.dropout_prob > 0.0 && rng.uniform() < cfg.dropout_prob) {
            continue;
        }
        while (seg + 1 < truth.points.size() &&
               truth.points[seg + 1].epoch_s <= t) {
            ++seg;
        }
        double truth_val = truth.points[seg].value;
        if (seg + 1 < truth.points.size() &&
            truth.points[seg + 1].epoch_s > truth.points[seg].epoch_s) {
            const auto& a = truth.points[seg];
            const auto& b = truth.points[seg + 1];
            const double frac = static_cast<double>(t - a.epoch_s) /
                                static_cast<double>(b.epoch_s - a.epoch_s);
            truth_val = a.value + frac * (b.value - a.value);
        }
        const double elapsed = static_cast<double>(t - t0);
        const double t_days = elapsed / 86400.0;
        double drift = 0.0;
        if (cfg.drift_mode == DriftMode::linear) {
            drift = cfg.drift_ppm_per_day * t_days;
        } else {
            drift = cfg.drift_ppm_per_day * cfg.drift_tau_days *
                    (1.0 - std::exp(-t_days / cfg.drift_tau_days));
        }
        double pre = cfg.gain * truth_val * cfg.pressure_ratio.at(elapsed) +
                     cfg.offset_ppm + drift +
                     cfg.temp_coeff_ppm_per_k *
                         (cfg.temperature.at(elapsed) - cfg.temp_ref_c) +
                     cfg.humidity_coeff_ppm_per_pct *
                         (cfg.humidity.at(elapsed) - cfg.humidity_ref_pct);
        const double sigma =
            (cfg.noise_base_ppm + cfg.noise_frac * std::fabs(pre)) / 3.0;
        double value = sigma > 0.0 ? rng.normal(pre, sigma) : pre;
        if (cfg.quantize) {
            value = static_cast<double>(std::llround(value));
        }
        if (value < 0.0) value = 0.0;
        out.points.push_back({t, value});
    }
    return out;
}

namespace {

double parse_num(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidConfig("preset key '" + key + "' has bad value '" + v +
                            "'");
    }
}

bool set_trajectory(SineTrajectory& tr, const std::string& prefix,
                    const std::string& key, double v) {
    if (key == prefix + "_mean") {
        tr.mean = v;
    } else if (key == prefix + "_amplitude") {
        tr.amplitude = v;
    } else if (key == prefix + "_period_s") {
        tr.period_s = v;
    } else if (key == prefix + "_phase_rad") {
        tr.phase_rad = v;
    } else {
        return false;
    }
    return true;
}

}  // namespace

SynthPreset parse_preset(std::istream& in) {
    SynthPreset p;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw MalformedLine("unterminated section header", line_no);
            }
            section = line.substr(1, line.size() - 2);
            if (section != "truth" && section != "sensor") {
                throw InvalidConfig("unknown preset section [" + section +
                                    "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw MalformedLine("expected key = value", line_no);
        }
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t");
            return s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw MalformedLine("empty key or value", line_no);
        }
        if (section.empty()) {
            if (key == "seed") {
                p.root_seed =
                    static_cast<std::uint64_t>(parse_num(key, val));
            } else {
                throw InvalidConfig("unknown top-level preset key '" + key +
                                    "'");
            }
            continue;
        }
        // drift_mode is the one non-numeric value.
        const double v =
            key == "drift_mode" ? 0.0 : parse_num(key, val);
        if (section == "truth") {
            auto& t = p.truth;
            if (key == "baseline_ppm") {
                t.baseline_ppm = v;
            } else if (key == "diurnal_amplitude_ppm") {
                t.diurnal_amplitude_ppm = v;
            } else if (key == "diurnal_period_s") {
                t.diurnal_period_s = v;
            } else if (key == "diurnal_phase_rad") {
                t.diurnal_phase_rad = v;
            } else if (key == "ar1_phi") {
                t.ar1_phi = v;
            } else if (key == "ar1_sigma_ppm") {
                t.ar1_sigma_ppm = v;
            } else if (key == "interval_s") {
                t.interval_s = static_cast<std::int64_t>(v);
            } else if (key == "n_points") {
                t.n_points = static_cast<std::size_t>(v);
            } else if (key == "start_epoch_s") {
                t.start_epoch_s = static_cast<std::int64_t>(v);
            } else {
                throw InvalidConfig("unknown [truth] key '" + key + "'");
            }
        } else {
            auto& s = p.sensor;
            if (key == "gain") {
                s.gain = v;
            } else if (key == "offset_ppm") {
                s.offset_ppm = v;
            } else if (key == "drift_mode") {
                if (val == "linear") {
                    s.drift_mode = DriftMode::linear;
                } else if (val == "exponential") {
                    s.drift_mode = DriftMode::exponential;
                } else {
                    throw InvalidConfig("drift_mode must be linear or "
                                        "exponential");
                }
            } else if (key == "drift_ppm_per_day") {
                s.drift_ppm_per_day = v;
            } else if (key == "drift_tau_days") {
                s.drift_tau_days = v;
            } else if (key == "temp_coeff_ppm_per_k") {
                s.temp_coeff_ppm_per_k = v;
            } else if (key == "temp_ref_c") {
                s.temp_ref_c = v;
            } else if (key == "humidity_coeff_ppm_per_pct") {
                s.humidity_coeff_ppm_per_pct = v;
            } else if (key == "humidity_ref_pct") {
                s.humidity_ref_pct = v;
            } else if (key == "noise_base_ppm") {
                s.noise_base_ppm = v;
            } else if (key == "noise_frac") {
                s.noise_frac = v;
            } else if (key == "quantize") {
                s.quantize = v != 0.0;
            } else if (key == "interval_s") {
                s.interval_s = static_cast<std::int64_t>(v);
            } else if (key == "dropout_prob") {
                s.dropout_prob = v;
            } else if (set_trajectory(s.temperature, "temperature", key, v) ||
                       set_trajectory(s.pressure_ratio, "pressure_ratio", key,
                                      v) ||
                       set_trajectory(s.humidity, "humidity", key, v)) {
            } else {
                throw InvalidConfig("unknown [sensor] key '" + key + "'");
            }
        }
    }
    reseed_preset(p, p.root_seed);
    return p;
}

SynthPreset load_preset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    return parse_preset(in);
}

void reseed_preset(SynthPreset& preset, std::uint64_t root_seed) {
    preset.root_seed = root_seed;
    preset.truth.seed = derive_seed(root_seed, "truth");
    preset.sensor.seed = derive_seed(root_seed, "sensor");
}

SynthPreset default_preset() {
    SynthPreset p;
    p.truth.baseline_ppm = 420.0;
    p.truth.diurnal_amplitude_ppm = 0.5;
    p.truth.ar1_phi = 0.9;
    p.truth.ar1_sigma_ppm = 0.7196;
    p.truth.interval_s = 60;
    p.truth.n_points = 43200;  // 30 days at one per minute

    auto& s = p.sensor;
    s.gain = 0.95;
    s.offset_ppm = -40.0;
    s.drift_mode = DriftMode::linear;
    s.drift_ppm_per_day = -3.0;
    s.temp_coeff_ppm_per_k = 2.0;
    s.temperature = {15.0, 4.0, 86400.0, std::numbers::pi / 2.0};
    s.temp_ref_c = 15.0;
    s.pressure_ratio = {1.0, 0.005, 259200.0, 0.0};
    s.humidity_coeff_ppm_per_pct = 0.1;
    s.humidity = {75.0, 15.0, 86400.0, std::numbers::pi};
    s.humidity_ref_pct = 75.0;
    s.noise_base_ppm = 50.0;
    s.noise_frac = 0.05;
    s.quantize = true;
    s.interval_s = 10;
    s.dropout_prob = 0.03;
    reseed_preset(p, 1);
    return p;
}

}  // namespace aircal
