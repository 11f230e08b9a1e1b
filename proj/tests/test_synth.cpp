#include <cmath>
#include <sstream>

#include "aircal/errors.hpp"
#include "aircal/ingestion.hpp"
#include "aircal/synth.hpp"
#include "aircal/timeseries.hpp"
#include "doctest.h"

using namespace aircal;

TEST_CASE("truth generation is deterministic and time ordered") {
    TruthGenConfig cfg;
    cfg.n_points = 500;
    cfg.seed = 42;
    const Series a = generate_truth(cfg);
    const Series b = generate_truth(cfg);
    REQUIRE(a.size() == 500);
    CHECK(a.points == b.points);
    CHECK(a.is_time_ordered());
    CHECK(a.points[1].epoch_s - a.points[0].epoch_s == cfg.interval_s);
}

TEST_CASE("truth stays near its baseline") {
    TruthGenConfig cfg;
    cfg.n_points = 5000;
    cfg.seed = 1;
    const SummaryStats st = summary(generate_truth(cfg));
    CHECK(st.mean == doctest::Approx(cfg.baseline_ppm).epsilon(0.01));
    // Stationary AR(1) spread plus the diurnal term stays in single digits.
    CHECK(st.stddev < 10.0);
    CHECK(st.stddev > 0.5);
}

TEST_CASE("different seeds give different paths") {
    TruthGenConfig cfg;
    cfg.n_points = 100;
    cfg.seed = 1;
    const Series a = generate_truth(cfg);
    cfg.seed = 2;
    const Series b = generate_truth(cfg);
    CHECK(a.points != b.points);
}

TEST_CASE("sensor output is quantized and non-negative") {
    TruthGenConfig tcfg;
    tcfg.n_points = 200;
    tcfg.seed = 3;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.seed = 4;
    const Series sensor = generate_sensor(truth, scfg);
    CHECK_FALSE(sensor.empty());
    for (const auto& p : sensor.points) {
        CHECK(p.value == std::floor(p.value));
        CHECK(p.value >= 0.0);
    }
}

TEST_CASE("dropout of one removes every reading") {
    TruthGenConfig tcfg;
    tcfg.n_points = 50;
    tcfg.seed = 5;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.dropout_prob = 1.0;
    scfg.seed = 6;
    CHECK(generate_sensor(truth, scfg).empty());
}

TEST_CASE("dropout thins the stream at roughly its rate") {
    TruthGenConfig tcfg;
    tcfg.n_points = 2000;
    tcfg.seed = 7;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.dropout_prob = 0.25;
    scfg.seed = 8;
    const Series with = generate_sensor(truth, scfg);
    scfg.dropout_prob = 0.0;
    const Series without = generate_sensor(truth, scfg);
    const double kept = static_cast<double>(with.size()) /
                        static_cast<double>(without.size());
    CHECK(kept == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("offset shifts the sensor mean") {
    TruthGenConfig tcfg;
    tcfg.n_points = 3000;
    tcfg.seed = 9;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.seed = 10;
    scfg.noise_base_ppm = 0.0;
    scfg.noise_frac = 0.0;
    scfg.quantize = false;
    const double base = summary(generate_sensor(truth, scfg)).mean;
    scfg.offset_ppm = -40.0;
    const double shifted = summary(generate_sensor(truth, scfg)).mean;
    CHECK(base - shifted == doctest::Approx(40.0).epsilon(0.01));
}

TEST_CASE("linear drift moves the late readings") {
    TruthGenConfig tcfg;
    tcfg.n_points = 1440;  // one day at a point per minute
    tcfg.diurnal_amplitude_ppm = 0.0;
    tcfg.ar1_sigma_ppm = 0.0;
    tcfg.seed = 11;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.seed = 12;
    scfg.noise_base_ppm = 0.0;
    scfg.noise_frac = 0.0;
    scfg.quantize = false;
    scfg.gain = 1.0;
    scfg.drift_ppm_per_day = -10.0;
    const Series drifted = generate_sensor(truth, scfg);
    // First reading sits at zero elapsed days, the last near one full day.
    const double first = drifted.points.front().value;
    const double last = drifted.points.back().value;
    CHECK(first - last == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("exponential drift saturates toward its asymptote") {
    TruthGenConfig tcfg;
    tcfg.n_points = 14400;  // ten days
    tcfg.diurnal_amplitude_ppm = 0.0;
    tcfg.ar1_sigma_ppm = 0.0;
    tcfg.seed = 13;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.seed = 14;
    scfg.noise_base_ppm = 0.0;
    scfg.noise_frac = 0.0;
    scfg.quantize = false;
    scfg.drift_mode = DriftMode::exponential;
    scfg.drift_ppm_per_day = -12.0;
    scfg.drift_tau_days = 1.0;
    const Series drifted = generate_sensor(truth, scfg);
    const double first = drifted.points.front().value;
    const double last = drifted.points.back().value;
    // rate * tau * (1 - e^-10) is within half a percent of rate * tau.
    CHECK(first - last == doctest::Approx(12.0).epsilon(0.005));
    // Early drop is steeper than linear: 1 - 1/e of the asymptote is gone
    // after one day (8640 readings at one per 10 s).
    const double after_one_day = drifted.points[8640].value;
    CHECK(first - after_one_day ==
          doctest::Approx(12.0 * (1.0 - std::exp(-1.0))).epsilon(0.01));
}

TEST_CASE("temperature sensitivity follows the trajectory") {
    TruthGenConfig tcfg;
    tcfg.n_points = 2880;
    tcfg.diurnal_amplitude_ppm = 0.0;
    tcfg.ar1_sigma_ppm = 0.0;
    tcfg.seed = 15;
    const Series truth = generate_truth(tcfg);
    SensorGenConfig scfg;
    scfg.seed = 16;
    scfg.noise_base_ppm = 0.0;
    scfg.noise_frac = 0.0;
    scfg.quantize = false;
    scfg.temp_coeff_ppm_per_k = 2.0;
    scfg.temperature = {15.0, 5.0, 86400.0, 0.0};
    scfg.temp_ref_c = 15.0;
    const Series s = generate_sensor(truth, scfg);
    const SummaryStats st = summary(s);
    // +-5 K at 2 ppm/K swings readings +-10 ppm around the clean value.
    CHECK(st.max - st.min == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("preset round-trip through the generator and parsers") {
    SynthPreset p = default_preset();
    p.truth.n_points = 300;
    const Series truth = generate_truth(p.truth);
    const Series sensor = generate_sensor(truth, p.sensor);
    std::ostringstream ts, ss;
    write_truth_csv(ts, truth);
    write_sensor_csv(ss, sensor);
    std::istringstream tin(ts.str()), sin(ss.str());
    CHECK(parse_truth_csv(tin).series.points == truth.points);
    CHECK(parse_sensor_csv(sin).series.points == sensor.points);
}

TEST_CASE("preset text parsing fills the named fields") {
    std::istringstream in(
        "# comment\n"
        "seed = 99\n"
        "\n"
        "[truth]\n"
        "baseline_ppm = 400\n"
        "n_points = 10\n"
        "\n"
        "[sensor]\n"
        "gain = 0.9\n"
        "drift_mode = exponential\n"
        "temperature_amplitude = 3.5\n");
    const SynthPreset p = parse_preset(in);
    CHECK(p.root_seed == 99);
    CHECK(p.truth.baseline_ppm == 400.0);
    CHECK(p.truth.n_points == 10);
    CHECK(p.sensor.gain == 0.9);
    CHECK(p.sensor.drift_mode == DriftMode::exponential);
    CHECK(p.sensor.temperature.amplitude == 3.5);
}

TEST_CASE("seed key reseeds both generators deterministically") {
    std::istringstream a_in("seed = 5\n[truth]\nn_points = 10\n");
    std::istringstream b_in("seed = 5\n[truth]\nn_points = 10\n");
    std::istringstream c_in("seed = 6\n[truth]\nn_points = 10\n");
    const SynthPreset a = parse_preset(a_in);
    const SynthPreset b = parse_preset(b_in);
    const SynthPreset c = parse_preset(c_in);
    CHECK(a.truth.seed == b.truth.seed);
    CHECK(a.sensor.seed == b.sensor.seed);
    CHECK(a.truth.seed != c.truth.seed);
    CHECK(a.truth.seed != a.sensor.seed);
}

TEST_CASE("unknown preset keys are rejected") {
    std::istringstream top("voltage = 5\n");
    CHECK_THROWS_AS(parse_preset(top), InvalidConfig);
    std::istringstream sect("[truth]\nvoltage = 5\n");
    CHECK_THROWS_AS(parse_preset(sect), InvalidConfig);
    std::istringstream badsect("[weather]\nrain = 1\n");
    CHECK_THROWS_AS(parse_preset(badsect), InvalidConfig);
    std::istringstream badmode("[sensor]\ndrift_mode = cubic\n");
    CHECK_THROWS_AS(parse_preset(badmode), InvalidConfig);
}

TEST_CASE("invalid generator settings are rejected") {
    TruthGenConfig t;
    t.ar1_phi = 1.0;
    CHECK_THROWS_AS(generate_truth(t), InvalidConfig);
    TruthGenConfig t2;
    t2.interval_s = 0;
    CHECK_THROWS_AS(generate_truth(t2), InvalidConfig);

    TruthGenConfig ok;
    ok.n_points = 5;
    const Series truth = generate_truth(ok);
    SensorGenConfig s;
    s.dropout_prob = 1.5;
    CHECK_THROWS_AS(generate_sensor(truth, s), InvalidConfig);
    SensorGenConfig s2;
    s2.gain = 0.0;
    CHECK_THROWS_AS(generate_sensor(truth, s2), InvalidConfig);
}
