// End-to-end checks of the command-line binary: every subcommand, the
// documented exit codes, and byte-level determinism of repeated runs.
// The binary path and the preset directory come in as compile-time
// definitions so the suite works from any build directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kBin = AIRCAL_BIN;
const fs::path kPresets = AIRCAL_PRESET_DIR;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("aircal_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string shquote(const fs::path& p) { return "\"" + p.string() + "\""; }

// Runs the binary with the given arguments, captures both streams to
// files in `dir`, and returns the process exit code.
int run_cli(const TempDir& dir, const std::string& args) {
    const std::string cmd = shquote(kBin) + " " + args + " > " +
                            shquote(dir / "stdout.txt") + " 2> " +
                            shquote(dir / "stderr.txt");
    const int raw = std::system(cmd.c_str());
#ifdef _WIN32
    return raw;
#else
    if (WIFEXITED(raw)) return WEXITSTATUS(raw);
    return -1;
#endif
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string captured_stderr(const TempDir& dir) {
    return slurp(dir / "stderr.txt");
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

// Generates a small two-day synthetic pair and matches it, leaving
// matched.csv in the temp dir. Returns the matched path.
fs::path make_matched(const TempDir& dir, const std::string& preset,
                      const std::string& name = "matched.csv") {
    REQUIRE(run_cli(dir, "synth " + shquote(kPresets / preset) + " " +
                             shquote(dir.path)) == 0);
    const fs::path matched = dir / name;
    REQUIRE(run_cli(dir, "match " + shquote(dir / "sensor.csv") + " " +
                             shquote(dir / "truth.csv") + " " +
                             shquote(matched)) == 0);
    return matched;
}

}  // namespace

TEST_CASE("running without a subcommand fails with the usage exit code") {
    TempDir dir("nosub");
    CHECK(run_cli(dir, "") == 2);
    CHECK(run_cli(dir, "frobnicate") == 2);
}

TEST_CASE("help exits cleanly") {
    TempDir dir("help");
    CHECK(run_cli(dir, "--help") == 0);
    CHECK(run_cli(dir, "train --help") == 0);
}

TEST_CASE("missing input files give the input-error exit code") {
    TempDir dir("missing");
    CHECK(run_cli(dir, "match nope.csv nada.csv out.csv") == 2);
    CHECK(run_cli(dir, "train nope.csv model.bin") == 2);
    CHECK(run_cli(dir, "stats nope.csv " + shquote(dir / "stats")) == 2);
    CHECK(run_cli(dir, "synth nope.preset " + shquote(dir.path)) == 2);
    CHECK(run_cli(dir, "matrix nope.plan") == 2);
    CHECK_FALSE(captured_stderr(dir).empty());
}

TEST_CASE("synth writes both series and is seed-deterministic") {
    TempDir dir("synth");
    REQUIRE(run_cli(dir, "synth " + shquote(kPresets / "clean.preset") + " " +
                             shquote(dir.path)) == 0);
    REQUIRE(fs::exists(dir / "sensor.csv"));
    REQUIRE(fs::exists(dir / "truth.csv"));
    const std::string sensor_once = slurp(dir / "sensor.csv");
    const std::string truth_once = slurp(dir / "truth.csv");
    CHECK(line_count(truth_once) == 2881);  // header + two days of minutes

    // Same preset, same bytes.
    REQUIRE(run_cli(dir, "synth " + shquote(kPresets / "clean.preset") + " " +
                             shquote(dir.path)) == 0);
    CHECK(slurp(dir / "sensor.csv") == sensor_once);
    CHECK(slurp(dir / "truth.csv") == truth_once);

    // A different seed changes the stream; repeating it restores it.
    REQUIRE(run_cli(dir, "synth " + shquote(kPresets / "clean.preset") + " " +
                             shquote(dir.path) + " --seed 99") == 0);
    const std::string sensor_reseeded = slurp(dir / "sensor.csv");
    CHECK(sensor_reseeded != sensor_once);
    REQUIRE(run_cli(dir, "synth " + shquote(kPresets / "clean.preset") + " " +
                             shquote(dir.path) + " --seed 99") == 0);
    CHECK(slurp(dir / "sensor.csv") == sensor_reseeded);
}

TEST_CASE("match reports coverage and writes a loadable matched set") {
    TempDir dir("match");
    const fs::path matched = make_matched(dir, "clean.preset");
    const std::string text = slurp(dir / "stdout.txt");
    CHECK(text.find("matched") != std::string::npos);
    const std::string body = slurp(matched);
    CHECK(line_count(body) >= 1000);
    CHECK(body.rfind("epoch_s,", 0) == 0);
}

TEST_CASE("stats writes the report files") {
    TempDir dir("stats");
    const fs::path matched = make_matched(dir, "clean.preset");
    const fs::path out = dir / "report";
    REQUIRE(run_cli(dir, "stats " + shquote(matched) + " " + shquote(out)) ==
            0);
    REQUIRE(fs::exists(out / "normality.csv"));
    REQUIRE(fs::exists(out / "covariance.txt"));
    const std::string normality = slurp(out / "normality.csv");
    CHECK(normality.rfind("series,k,slice,n,method,statistic,p_value,warning",
                          0) == 0);
    const std::string cov = slurp(out / "covariance.txt");
    CHECK(cov.find("covariance matrix") != std::string::npos);
    // One histogram per report cell: series in {features, labels},
    // k in {2, 4}, slices 0..k-1, so 2 * (2 + 4) files.
    std::size_t histograms = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("hist_", 0) == 0) ++histograms;
    }
    CHECK(histograms == 12);
}

TEST_CASE("stats compares a second matched set when asked") {
    TempDir dir("statspair");
    const fs::path first = make_matched(dir, "clean.preset", "a.csv");
    // Reuse the same matched file as its own comparison partner; the
    // cross-covariance section must appear either way.
    const fs::path out = dir / "report";
    REQUIRE(run_cli(dir, "stats " + shquote(first) + " " + shquote(out) +
                             " --pair " + shquote(first)) == 0);
    const std::string cov = slurp(out / "covariance.txt");
    CHECK(cov.find("reference, reference of") != std::string::npos);
}

TEST_CASE("train writes a model and a log, and repeats byte-for-byte") {
    TempDir dir("train");
    const fs::path matched = make_matched(dir, "clean.preset");
    const fs::path model = dir / "cal.model";
    REQUIRE(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                             " --model rfr --seed 7") == 0);
    REQUIRE(fs::exists(model));
    REQUIRE(fs::exists(dir / "cal.model.log"));
    const std::string log = slurp(dir / "cal.model.log");
    CHECK(log.find("final,") != std::string::npos);
    const std::string once = slurp(model);

    REQUIRE(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                             " --model rfr --seed 7") == 0);
    CHECK(slurp(model) == once);

    // A different seed gives a different forest.
    REQUIRE(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                             " --model rfr --seed 8") == 0);
    CHECK(slurp(model) != once);
}

TEST_CASE("neural training logs per-epoch validation error") {
    TempDir dir("nnlog");
    const fs::path matched = make_matched(dir, "clean.preset");
    const fs::path model = dir / "net.model";
    REQUIRE(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                             " --model cnn --seed 5 --max-epochs 3") == 0);
    const std::string log = slurp(dir / "net.model.log");
    CHECK(log.rfind("epoch,val_mae_ppm", 0) == 0);
    CHECK(log.find("\n1,") != std::string::npos);
    CHECK(log.find("final,") != std::string::npos);
}

TEST_CASE("a runaway learning rate fails with the training exit code") {
    TempDir dir("diverge");
    const fs::path matched = make_matched(dir, "clean.preset");
    const fs::path model = dir / "bad.model";
    CHECK(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                           " --model cnn --seed 5 --max-epochs 3"
                           " --learning-rate 1e80") == 3);
    const std::string err = captured_stderr(dir);
    CHECK(err.find("training failed") != std::string::npos);
    CHECK(err.find("epoch") != std::string::npos);
    CHECK_FALSE(fs::exists(model));
}

TEST_CASE("predict emits one row per matched sample") {
    TempDir dir("predict");
    const fs::path matched = make_matched(dir, "clean.preset");
    const fs::path model = dir / "cal.model";
    REQUIRE(run_cli(dir, "train " + shquote(matched) + " " + shquote(model) +
                             " --model rfr --seed 7") == 0);
    const fs::path preds = dir / "preds.csv";
    REQUIRE(run_cli(dir, "predict " + shquote(model) + " " + shquote(matched) +
                             " " + shquote(preds)) == 0);
    const std::string body = slurp(preds);
    CHECK(body.rfind("epoch_s,predicted_ppm,reference_ppm", 0) == 0);
    CHECK(line_count(body) == line_count(slurp(matched)));

    // Damaged model files are an input error, not a crash.
    std::ofstream(dir / "junk.model", std::ios::binary) << "not a model";
    CHECK(run_cli(dir, "predict " + shquote(dir / "junk.model") + " " +
                           shquote(matched) + " " + shquote(preds)) == 2);
}

TEST_CASE("matrix runs a two-set plan and writes every artifact") {
    TempDir dir("matrix");
    const fs::path a = make_matched(dir, "period1.preset", "a.csv");
    const fs::path b = make_matched(dir, "period2.preset", "b.csv");
    const fs::path out = dir / "results";

    std::ofstream plan(dir / "plan.ini");
    plan << "seed = 5\n"
         << "models = rfr\n"
         << "pairs = all\n"
         << "out_dir = " << out.string() << "\n"
         << "[sets]\n"
         << "p1 = " << a.string() << "\n"
         << "p2 = " << b.string() << "\n";
    plan.close();

    REQUIRE(run_cli(dir, "matrix " + shquote(dir / "plan.ini")) == 0);
    REQUIRE(fs::exists(out / "metrics.csv"));
    REQUIRE(fs::exists(out / "mae_matrix_rfr.csv"));
    REQUIRE(fs::exists(out / "summary.txt"));

    const std::string metrics = slurp(out / "metrics.csv");
    CHECK(metrics.rfind(
              "train_set,predict_set,model,mae,accuracy_pct,r2,pearson,kl,js",
              0) == 0);
    CHECK(line_count(metrics) == 5);  // header + 2x2 grid

    const std::string grid = slurp(out / "mae_matrix_rfr.csv");
    CHECK(grid.rfind("train\\predict,p1,p2", 0) == 0);
    CHECK(slurp(out / "summary.txt").find("Cross-evaluation report") !=
          std::string::npos);
}

TEST_CASE("matrix rejects a malformed plan") {
    TempDir dir("badplan");
    std::ofstream plan(dir / "plan.ini");
    plan << "speed = 5\n";
    plan.close();
    CHECK(run_cli(dir, "matrix " + shquote(dir / "plan.ini")) == 2);
}

TEST_CASE("matrix rejects a plan whose set files are missing") {
    TempDir dir("missingset");
    std::ofstream plan(dir / "plan.ini");
    plan << "models = rfr\n"
         << "[sets]\n"
         << "a = /definitely/not/here.csv\n";
    plan.close();
    CHECK(run_cli(dir, "matrix " + shquote(dir / "plan.ini")) == 2);
}
