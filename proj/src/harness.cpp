#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "aircal/atomic_file.hpp"
#include "aircal/errors.hpp"
#include "aircal/harness.hpp"
#include "aircal/ingestion.hpp"
#include "aircal/rng.hpp"

namespace aircal {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw InvalidValue("expected unsigned integer, got '" + s + "'",
                           line);
    }
    return v;
}

}  // namespace

ExperimentPlan parse_plan(std::istream& in) {
    ExperimentPlan plan;
    bool in_sets = false;
    bool saw_pairs = false;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line == "[sets]") {
                in_sets = true;
                continue;
            }
            throw MalformedLine("unknown section " + line, line_no);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw MalformedLine("expected key = value", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw MalformedLine("empty key", line_no);
        if (in_sets) {
            plan.sets.push_back({key, std::filesystem::path(value)});
            continue;
        }
        if (key == "seed") {
            plan.seed = parse_u64(value, line_no);
        } else if (key == "models") {
            plan.models.clear();
            for (const auto& name : split_list(value, ',')) {
                const auto kind = parse_model_kind(name);
                if (!kind) {
                    throw InvalidConfig("unknown model kind '" + name + "'");
                }
                plan.models.push_back(*kind);
            }
        } else if (key == "pairs") {
            saw_pairs = true;
            plan.pairs.clear();
            if (value == "all") {
                plan.all_pairs = true;
            } else {
                plan.all_pairs = false;
                for (const auto& entry : split_list(value, ',')) {
                    const auto colon = entry.find(':');
                    if (colon == std::string::npos) {
                        throw MalformedLine(
                            "pair '" + entry + "' needs train:predict",
                            line_no);
                    }
                    plan.pairs.emplace_back(trim(entry.substr(0, colon)),
                                            trim(entry.substr(colon + 1)));
                }
            }
        } else if (key == "out_dir") {
            plan.out_dir = std::filesystem::path(value);
        } else {
            throw InvalidConfig("unknown plan key '" + key + "'");
        }
    }
    if (!saw_pairs) plan.all_pairs = true;
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    return parse_plan(in);
}

std::vector<std::pair<std::string, std::string>> resolve_pairs(
    const ExperimentPlan& plan) {
    if (plan.sets.empty()) throw InvalidConfig("plan lists no sets");
    if (plan.models.empty()) throw InvalidConfig("plan lists no models");
    std::vector<std::string> names;
    for (const auto& s : plan.sets) {
        if (std::find(names.begin(), names.end(), s.name) != names.end()) {
            throw InvalidConfig("duplicate set name '" + s.name + "'");
        }
        names.push_back(s.name);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    if (plan.all_pairs) {
        for (const auto& train : names) {
            for (const auto& predict : names) {
                pairs.emplace_back(train, predict);
            }
        }
    } else {
        pairs = plan.pairs;
        for (const auto& [train, predict] : pairs) {
            for (const auto* name : {&train, &predict}) {
                if (std::find(names.begin(), names.end(), *name) ==
                    names.end()) {
                    throw InvalidConfig("pair references unknown set '" +
                                        *name + "'");
                }
            }
        }
    }
    if (pairs.empty()) throw InvalidConfig("plan lists no pairs");
    return pairs;
}

std::uint64_t cell_seed(std::uint64_t plan_seed, ModelKind kind,
                        const std::string& train_set) {
    return derive_seed(plan_seed,
                       std::string(to_string(kind)) + ":" + train_set);
}

namespace {

struct SetView {
    const MatchedDataSet* ds = nullptr;
    std::vector<FeatureRow> rows;
    std::vector<double> labels;
    std::int64_t first_epoch = 0;
    std::int64_t last_epoch = 0;
};

SetView make_view(const MatchedDataSet& ds) {
    SetView v;
    v.ds = &ds;
    v.rows.reserve(ds.size());
    for (const auto& s : ds.samples) v.rows.push_back(s.features);
    v.labels = ds.labels();
    if (!ds.samples.empty()) {
        v.first_epoch = ds.samples.front().epoch_s;
        v.last_epoch = ds.samples.back().epoch_s;
    }
    return v;
}

bool grid_is_complete(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& names) {
    for (const auto& train : names) {
        for (const auto& predict : names) {
            if (std::find(pairs.begin(), pairs.end(),
                          std::make_pair(train, predict)) == pairs.end()) {
                return false;
            }
        }
    }
    return true;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : "nan";
}

std::string fixed3(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
}

}  // namespace

MatrixResult run_matrix(const ExperimentPlan& plan,
                        const std::vector<MatchedDataSet>& sets) {
    if (sets.size() != plan.sets.size()) {
        throw LengthMismatch("plan names " + std::to_string(plan.sets.size()) +
                             " sets, got " + std::to_string(sets.size()));
    }
    const auto pairs = resolve_pairs(plan);

    MatrixResult result;
    std::map<std::string, SetView> views;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        result.set_order.push_back(plan.sets[i].name);
        views.emplace(plan.sets[i].name, make_view(sets[i]));
    }
    result.complete_grid = grid_is_complete(pairs, result.set_order);

    // Each (kind, train set) is trained at most once and reused across
    // every predict set it appears with.
    std::map<std::pair<ModelKind, std::string>, Model> trained;
    std::map<std::pair<ModelKind, std::string>, std::string> train_errors;

    for (ModelKind kind : plan.models) {
        for (const auto& [train_name, predict_name] : pairs) {
            MatrixCell cell;
            cell.train_set = train_name;
            cell.predict_set = predict_name;
            cell.kind = kind;
            const SetView& train_view = views.at(train_name);
            const SetView& predict_view = views.at(predict_name);
            cell.non_causal = train_name != predict_name &&
                              train_view.first_epoch > predict_view.last_epoch;

            const auto key = std::make_pair(kind, train_name);
            if (auto err = train_errors.find(key);
                err != train_errors.end()) {
                cell.failed = true;
                cell.error = err->second;
                result.cells.push_back(std::move(cell));
                continue;
            }
            try {
                if (trained.find(key) == trained.end()) {
                    TrainConfig cfg;
                    cfg.kind = kind;
                    cfg.seed = cell_seed(plan.seed, kind, train_name);
                    trained.emplace(key,
                                    train_model(*train_view.ds, cfg));
                }
                const Model& model = trained.at(key);
                const std::vector<double> predicted =
                    model.predict_rows(predict_view.rows);
                cell.metrics = metric_row(predicted, predict_view.labels);
            } catch (const Error& e) {
                cell.failed = true;
                cell.error = e.what();
                if (trained.find(key) == trained.end()) {
                    train_errors.emplace(key, cell.error);
                }
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

MatrixResult run_matrix(const ExperimentPlan& plan) {
    std::vector<MatchedDataSet> sets;
    sets.reserve(plan.sets.size());
    for (const auto& s : plan.sets) {
        sets.push_back(load_matched_csv(s.path.string()));
    }
    return run_matrix(plan, sets);
}

void write_metrics_csv(std::ostream& out,
                       const std::vector<MatrixCell>& cells) {
    out << "train_set,predict_set,model,mae,accuracy_pct,r2,pearson,kl,js\n";
    for (const auto& c : cells) {
        out << c.train_set << ',' << c.predict_set << ','
            << to_string(c.kind) << ',';
        if (c.failed) {
            out << "nan,nan,nan,nan,nan,nan\n";
            continue;
        }
        out << format_double(c.metrics.mae) << ','
            << fmt_opt(c.metrics.accuracy_pct) << ','
            << fmt_opt(c.metrics.r2) << ',' << fmt_opt(c.metrics.pearson)
            << ',' << format_double(c.metrics.kl) << ','
            << format_double(c.metrics.js) << '\n';
    }
}

void write_mae_matrix_csv(std::ostream& out, const MatrixResult& result,
                          ModelKind kind) {
    out << "train\\predict";
    for (const auto& name : result.set_order) out << ',' << name;
    out << '\n';
    for (const auto& train : result.set_order) {
        out << train;
        for (const auto& predict : result.set_order) {
            out << ',';
            const auto it = std::find_if(
                result.cells.begin(), result.cells.end(),
                [&](const MatrixCell& c) {
                    return c.kind == kind && c.train_set == train &&
                           c.predict_set == predict;
                });
            if (it == result.cells.end() || it->failed) {
                out << "nan";
            } else {
                out << format_double(it->metrics.mae);
            }
        }
        out << '\n';
    }
}

std::string format_summary(const MatrixResult& result) {
    std::ostringstream out;
    out << "Cross-evaluation report\n";
    out << "Same-set rows are evaluated on the full set, including the "
           "portion seen in training.\n\n";

    out << std::left << std::setw(14) << "train" << std::setw(14)
        << "predict" << std::setw(10) << "model" << std::right
        << std::setw(10) << "mae" << std::setw(10) << "acc%"
        << std::setw(9) << "r2" << std::setw(9) << "pearson"
        << std::setw(9) << "kl" << std::setw(9) << "js"
        << "  flags\n";
    for (const auto& c : result.cells) {
        out << std::left << std::setw(14) << c.train_set << std::setw(14)
            << c.predict_set << std::setw(10) << to_string(c.kind)
            << std::right;
        if (c.failed) {
            for (int i = 0; i < 2; ++i) out << std::setw(10) << "-";
            for (int i = 0; i < 4; ++i) out << std::setw(9) << "-";
            out << "  FAILED: " << c.error << '\n';
            continue;
        }
        out << std::setw(10) << fixed3(c.metrics.mae) << std::setw(10)
            << (c.metrics.accuracy_pct ? fixed3(*c.metrics.accuracy_pct)
                                       : std::string("-"))
            << std::setw(9)
            << (c.metrics.r2 ? fixed3(*c.metrics.r2) : std::string("-"))
            << std::setw(9)
            << (c.metrics.pearson ? fixed3(*c.metrics.pearson)
                                  : std::string("-"))
            << std::setw(9) << fixed3(c.metrics.kl) << std::setw(9)
            << fixed3(c.metrics.js);
        out << "  ";
        if (c.non_causal) out << "non-causal";
        for (const auto& note : c.metrics.notes) out << " [" << note << ']';
        out << '\n';
    }

    std::vector<ModelKind> kinds;
    for (const auto& c : result.cells) {
        if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
            kinds.push_back(c.kind);
        }
    }
    if (result.complete_grid) {
        for (ModelKind kind : kinds) {
            out << "\nMAE matrix (" << to_string(kind)
                << "), rows train, columns predict:\n";
            out << std::left << std::setw(14) << "";
            for (const auto& name : result.set_order) {
                out << std::right << std::setw(12) << name;
            }
            out << '\n';
            for (const auto& train : result.set_order) {
                out << std::left << std::setw(14) << train;
                for (const auto& predict : result.set_order) {
                    const auto it = std::find_if(
                        result.cells.begin(), result.cells.end(),
                        [&](const MatrixCell& c) {
                            return c.kind == kind &&
                                   c.train_set == train &&
                                   c.predict_set == predict;
                        });
                    if (it == result.cells.end() || it->failed) {
                        out << std::right << std::setw(12) << "-";
                    } else {
                        out << std::right << std::setw(12)
                            << fixed3(it->metrics.mae);
                    }
                }
                out << '\n';
            }
        }
    }
    return out.str();
}

MatrixResult run_matrix_to_dir(const ExperimentPlan& plan) {
    const MatrixResult result = run_matrix(plan);
    std::filesystem::create_directories(plan.out_dir);
    {
        std::ostringstream ss;
        write_metrics_csv(ss, result.cells);
        write_file_atomic(plan.out_dir / "metrics.csv", ss.str());
    }
    if (result.complete_grid) {
        for (ModelKind kind : plan.models) {
            std::ostringstream ss;
            write_mae_matrix_csv(ss, result, kind);
            write_file_atomic(plan.out_dir /
                                  ("mae_matrix_" +
                                   std::string(to_string(kind)) + ".csv"),
                              ss.str());
        }
    }
    write_file_atomic(plan.out_dir / "summary.txt", format_summary(result));
    return result;
}

}  // namespace aircal
