#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>

#include "aircal/timeseries.hpp"

namespace aircal {

// Slow sinusoidal environment driver (temperature, pressure, humidity).
// Evaluated against seconds elapsed since the start of the generated span.
struct SineTrajectory {
    double mean = 0.0;
    double amplitude = 0.0;
    double period_s = 86400.0;
    double phase_rad = 0.0;

    double at(double elapsed_s) const;
};

// Reference-instrument generator: baseline + diurnal sinusoid + AR(1).
struct TruthGenConfig {
    double baseline_ppm = 420.0;
    double diurnal_amplitude_ppm = 0.5;
    double diurnal_period_s = 86400.0;
    double diurnal_phase_rad = 0.0;
    double ar1_phi = 0.9;
    double ar1_sigma_ppm = 0.7196;
    std::int64_t interval_s = 60;
    std::size_t n_points = 43200;
    std::int64_t start_epoch_s = 1662681600;
    std::uint64_t seed = 1;
};

enum class DriftMode { linear, exponential };

// Low-cost sensor response applied on a fixed tick over the truth span.
// Per tick: the truth value is linearly interpolated, scaled by
// gain * pressure_ratio, shifted by offset, drift, temperature and humidity
// terms, perturbed by reading-dependent Gaussian noise, optionally rounded
// to an integer count, and clamped at zero. Each tick may drop out.
struct SensorGenConfig {
    double gain = 1.0;
    double offset_ppm = 0.0;
    DriftMode drift_mode = DriftMode::linear;
    double drift_ppm_per_day = 0.0;
    double drift_tau_days = 10.0;  // exponential mode time constant
    double temp_coeff_ppm_per_k = 0.0;
    SineTrajectory temperature{15.0, 0.0, 86400.0, 0.0};
    double temp_ref_c = 15.0;
    SineTrajectory pressure_ratio{1.0, 0.0, 86400.0, 0.0};
    double humidity_coeff_ppm_per_pct = 0.0;
    SineTrajectory humidity{75.0, 0.0, 86400.0, 0.0};
    double humidity_ref_pct = 75.0;
    double noise_base_ppm = 50.0;   // sigma = (base + frac * |reading|) / 3
    double noise_frac = 0.05;
    bool quantize = true;
    std::int64_t interval_s = 10;
    double dropout_prob = 0.0;
    std::uint64_t seed = 2;
};

Series generate_truth(const TruthGenConfig& cfg);
Series generate_sensor(const Series& truth, const SensorGenConfig& cfg);

struct SynthPreset {
    std::uint64_t root_seed = 1;
    TruthGenConfig truth;
    SensorGenConfig sensor;
};

// Plain [truth] / [sensor] sections of key = value lines; see
// presets/default.preset for the full key list. A top-level `seed` derives
// both generator seeds.
SynthPreset parse_preset(std::istream& in);
SynthPreset load_preset(const std::filesystem::path& file);
SynthPreset default_preset();

// Re-derives truth/sensor seeds from the root seed.
void reseed_preset(SynthPreset& preset, std::uint64_t root_seed);

}  // namespace aircal
