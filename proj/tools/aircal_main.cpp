#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aircal/atomic_file.hpp"
#include "aircal/errors.hpp"
#include "aircal/gaussianity.hpp"
#include "aircal/harness.hpp"
#include "aircal/ingestion.hpp"
#include "aircal/matching.hpp"
#include "aircal/metrics.hpp"
#include "aircal/model.hpp"
#include "aircal/synth.hpp"
#include "aircal/timeseries.hpp"

namespace {

using namespace aircal;

std::string fixed3(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
}

std::string format_cov(const CovarianceMatrix2& m, const std::string& title) {
    std::ostringstream ss;
    ss << title << '\n';
    for (int r = 0; r < 2; ++r) {
        ss << " ";
        for (int c = 0; c < 2; ++c) {
            ss << std::right << std::setw(14) << fixed3(m.at(r, c));
        }
        ss << '\n';
    }
    return ss.str();
}

struct MatchArgs {
    std::string sensor;
    std::string truth;
    std::string out;
    std::int64_t window = 60;
};

int run_match(const MatchArgs& a) {
    const ParsedSeries sensor = load_sensor_csv(a.sensor);
    const ParsedSeries truth = load_truth_csv(a.truth);
    const MatchedDataSet ds =
        match_windows(sensor.series, truth.series, a.window);
    std::ostringstream body;
    write_matched_csv(body, ds);
    write_file_atomic(a.out, body.str());

    std::size_t padded = 0;
    for (const auto& s : ds.samples) {
        if (s.imputed_count > 0) ++padded;
    }
    const std::size_t total = truth.series.size();
    std::cout << "matched " << ds.size() << " of " << total
              << " reference points (" << padded << " padded, "
              << total - ds.size() << " discarded)";
    if (truth.duplicates_dropped > 0 || sensor.duplicates_dropped > 0) {
        std::cout << "; dropped " << truth.duplicates_dropped
                  << " duplicate reference and " << sensor.duplicates_dropped
                  << " duplicate sensor timestamps";
    }
    std::cout << '\n';
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

struct StatsArgs {
    std::string matched;
    std::string out_dir;
    std::size_t bins = 100;
    std::vector<std::string> pair_paths;
};

int run_stats(const StatsArgs& a) {
    const MatchedDataSet ds = load_matched_csv(a.matched);
    const NormalityReport rep = normality_report(ds, a.bins);
    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);

    {
        std::ostringstream csv;
        write_normality_csv(csv, rep);
        write_file_atomic(dir / "normality.csv", csv.str());
    }
    for (const auto& cell : rep.cells) {
        if (!cell.hist) continue;
        std::ostringstream csv;
        csv << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b + 1 < cell.hist->bin_edges.size(); ++b) {
            csv << format_double(cell.hist->bin_edges[b]) << ','
                << format_double(cell.hist->bin_edges[b + 1]) << ','
                << cell.hist->counts[b] << '\n';
        }
        std::ostringstream name;
        name << "hist_" << cell.series << "_k" << cell.k << "_slice"
             << cell.slice << ".csv";
        write_file_atomic(dir / name.str(), csv.str());
    }

    std::ostringstream report;
    report << format_normality_table(rep) << '\n';
    report << format_cov(covariance2(ds.feature_means(), ds.labels()),
                         "covariance matrix (window mean, reference)");
    for (const auto& path : a.pair_paths) {
        const MatchedDataSet other = load_matched_csv(path);
        const auto [x, y] = align_truncate(ds.labels(), other.labels());
        report << '\n'
               << format_cov(covariance2(x, y),
                             "covariance matrix (reference, reference of " +
                                 path + ")");
    }
    write_file_atomic(dir / "covariance.txt", report.str());
    std::cout << report.str();

    std::size_t usable = 0;
    for (const auto& cell : rep.cells) {
        if (cell.shapiro || cell.lillie) ++usable;
    }
    if (usable == 0) {
        std::cerr << "error: every report cell failed\n";
        return 2;
    }
    return 0;
}

struct TrainArgs {
    std::string matched;
    std::string out;
    std::string model = "rfr";
    std::uint64_t seed = 0;
    double validation_fraction = 0.2;
    std::string log_path;
    std::size_t trees = 0;       // 0 keeps the default
    std::size_t max_epochs = 0;  // 0 keeps the default
    double learning_rate = 0.0;  // 0 keeps the default
};

int run_train(const TrainArgs& a) {
    const auto kind = parse_model_kind(a.model);
    if (!kind) throw InvalidConfig("unknown model kind '" + a.model + "'");
    const MatchedDataSet ds = load_matched_csv(a.matched);

    TrainConfig cfg;
    cfg.kind = *kind;
    cfg.seed = a.seed;
    cfg.validation_fraction = a.validation_fraction;
    if (a.trees > 0) cfg.rfr.n_trees = a.trees;
    if (a.max_epochs > 0) {
        cfg.cnn.max_epochs = a.max_epochs;
        cfg.cnn_lstm.max_epochs = a.max_epochs;
    }
    if (a.learning_rate > 0.0) {
        cfg.cnn.learning_rate = a.learning_rate;
        cfg.cnn_lstm.learning_rate = a.learning_rate;
    }

    Model model;
    try {
        model = train_model(ds, cfg);
    } catch (const Error& e) {
        std::cerr << "training failed: " << e.what() << '\n';
        return 3;
    }
    save_model(model, a.out);

    const std::string log_path =
        a.log_path.empty() ? a.out + ".log" : a.log_path;
    std::ostringstream log;
    log << "epoch,val_mae_ppm\n";
    for (std::size_t e = 0; e < model.meta.val_mae_history.size(); ++e) {
        log << e + 1 << ',' << format_double(model.meta.val_mae_history[e])
            << '\n';
    }
    log << "final," << format_double(model.meta.validation_mae) << '\n';
    write_file_atomic(log_path, log.str());

    std::cout << "trained " << to_string(model.kind) << " on " << ds.size()
              << " samples: validation mae "
              << fixed3(model.meta.validation_mae) << " ppm, "
              << (model.meta.converged ? "converged" : "not converged");
    if (model.meta.epochs_run > 0) {
        std::cout << " after " << model.meta.epochs_run << " epochs";
    }
    std::cout << '\n' << "wrote " << a.out << " and " << log_path << '\n';
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string matched;
    std::string out;
};

int run_predict(const PredictArgs& a) {
    const Model model = load_model(a.model);
    const MatchedDataSet ds = load_matched_csv(a.matched);
    std::vector<FeatureRow> rows;
    rows.reserve(ds.size());
    for (const auto& s : ds.samples) rows.push_back(s.features);
    const std::vector<double> predicted = model.predict_rows(rows);
    const std::vector<double> reference = ds.labels();

    std::ostringstream csv;
    csv << "epoch_s,predicted_ppm,reference_ppm\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        csv << ds.samples[i].epoch_s << ',' << format_double(predicted[i])
            << ',' << format_double(reference[i]) << '\n';
    }
    write_file_atomic(a.out, csv.str());

    const MetricRow row = metric_row(predicted, reference);
    std::cout << "predicted " << ds.size() << " samples with "
              << to_string(model.kind) << ": mae " << fixed3(row.mae)
              << " ppm";
    if (row.accuracy_pct) std::cout << ", accuracy " << fixed3(*row.accuracy_pct) << "%";
    if (row.r2) std::cout << ", r2 " << fixed3(*row.r2);
    if (row.pearson) std::cout << ", pearson " << fixed3(*row.pearson);
    std::cout << ", kl " << fixed3(row.kl) << ", js " << fixed3(row.js)
              << '\n';
    for (const auto& note : row.notes) std::cout << "note: " << note << '\n';
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

int run_matrix(const std::string& plan_path) {
    const ExperimentPlan plan = load_plan(plan_path);
    resolve_pairs(plan);  // validate before any training
    for (const auto& s : plan.sets) {
        if (!std::filesystem::exists(s.path)) {
            throw InvalidConfig("set '" + s.name + "' file missing: " +
                                s.path.string());
        }
    }
    const MatrixResult result = run_matrix_to_dir(plan);
    std::cout << format_summary(result);
    std::cout << "\nwrote " << (plan.out_dir / "metrics.csv").string()
              << " and " << (plan.out_dir / "summary.txt").string() << '\n';

    std::size_t failed = 0;
    for (const auto& c : result.cells) {
        if (c.failed) ++failed;
    }
    if (failed == result.cells.size()) {
        std::cerr << "error: every cell failed\n";
        return 3;
    }
    return 0;
}

struct SynthArgs {
    std::string preset;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool reseed = false;
};

int run_synth(const SynthArgs& a) {
    SynthPreset preset = load_preset(a.preset);
    if (a.reseed) reseed_preset(preset, a.seed);
    const Series truth = generate_truth(preset.truth);
    const Series sensor = generate_sensor(truth, preset.sensor);

    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);
    {
        std::ostringstream csv;
        write_truth_csv(csv, truth);
        write_file_atomic(dir / "truth.csv", csv.str());
    }
    {
        std::ostringstream csv;
        write_sensor_csv(csv, sensor);
        write_file_atomic(dir / "sensor.csv", csv.str());
    }
    std::cout << "wrote " << truth.size() << " reference and "
              << sensor.size() << " sensor points under " << a.out_dir
              << '\n';
    if (sensor.empty()) {
        std::cout << "warning: sensor stream is empty\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Low-cost CO2 sensor calibration toolkit: window matching, "
        "distribution reports, model training, and cross-set evaluation."};
    app.require_subcommand(1);

    MatchArgs match_args;
    auto* cmd_match = app.add_subcommand(
        "match", "Match sensor readings to reference points by time window");
    cmd_match->add_option("sensor", match_args.sensor, "raw sensor CSV")
        ->required();
    cmd_match->add_option("truth", match_args.truth, "reference CSV")
        ->required();
    cmd_match->add_option("out", match_args.out, "matched CSV to write")
        ->required();
    cmd_match->add_option("--window", match_args.window,
                          "window width in seconds (default 60)");

    StatsArgs stats_args;
    auto* cmd_stats = app.add_subcommand(
        "stats", "Normality and covariance report for a matched set");
    cmd_stats->add_option("matched", stats_args.matched, "matched CSV")
        ->required();
    cmd_stats->add_option("out_dir", stats_args.out_dir, "output directory")
        ->required();
    cmd_stats->add_option("--bins", stats_args.bins,
                          "histogram bins (default 100)");
    cmd_stats->add_option("--pair", stats_args.pair_paths,
                          "other matched CSV to cross-covary against "
                          "(repeatable)");

    TrainArgs train_args;
    auto* cmd_train =
        app.add_subcommand("train", "Train a calibration model");
    cmd_train->add_option("matched", train_args.matched, "matched CSV")
        ->required();
    cmd_train->add_option("out", train_args.out, "model file to write")
        ->required();
    cmd_train->add_option("--model", train_args.model,
                          "rfr | svr | cnn | cnn_lstm (default rfr)");
    cmd_train->add_option("--seed", train_args.seed, "random seed");
    cmd_train->add_option("--validation-fraction",
                          train_args.validation_fraction,
                          "held-out fraction (default 0.2)");
    cmd_train->add_option("--log", train_args.log_path,
                          "training log path (default <out>.log)");
    cmd_train->add_option("--trees", train_args.trees,
                          "tree count override for rfr");
    cmd_train->add_option("--max-epochs", train_args.max_epochs,
                          "epoch cap override for neural kinds");
    cmd_train->add_option("--learning-rate", train_args.learning_rate,
                          "learning rate override for neural kinds");

    PredictArgs predict_args;
    auto* cmd_predict = app.add_subcommand(
        "predict", "Run a saved model over a matched set");
    cmd_predict->add_option("model", predict_args.model, "model file")
        ->required();
    cmd_predict->add_option("matched", predict_args.matched, "matched CSV")
        ->required();
    cmd_predict
        ->add_option("out", predict_args.out, "prediction CSV to write")
        ->required();

    std::string plan_path;
    auto* cmd_matrix = app.add_subcommand(
        "matrix", "Train-predict cross evaluation from a plan file");
    cmd_matrix->add_option("plan", plan_path, "experiment plan file")
        ->required();

    SynthArgs synth_args;
    auto* cmd_synth = app.add_subcommand(
        "synth", "Generate a synthetic sensor/reference pair");
    cmd_synth->add_option("preset", synth_args.preset, "preset file")
        ->required();
    cmd_synth->add_option("out_dir", synth_args.out_dir, "output directory")
        ->required();
    auto* seed_opt =
        cmd_synth->add_option("--seed", synth_args.seed,
                              "override the preset's root seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    synth_args.reseed = seed_opt->count() > 0;

    try {
        if (cmd_match->parsed()) return run_match(match_args);
        if (cmd_stats->parsed()) return run_stats(stats_args);
        if (cmd_train->parsed()) return run_train(train_args);
        if (cmd_predict->parsed()) return run_predict(predict_args);
        if (cmd_matrix->parsed()) return run_matrix(plan_path);
        if (cmd_synth->parsed()) return run_synth(synth_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
