#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aircal/matching.hpp"
#include "aircal/metrics.hpp"
#include "aircal/model.hpp"

namespace aircal {

// One named matched data set referenced by an experiment plan.
struct PlanSet {
    std::string name;
    std::filesystem::path path;
};

// A full cross-evaluation experiment: which sets exist, which model kinds
// to run, and which (train, predict) combinations to evaluate.
//
// Plan file format, `key = value` lines with `#` comments:
//
//   seed = 42
//   models = rfr, svr
//   pairs = all              # or explicit "train:predict, train:predict"
//   out_dir = results
//
//   [sets]
//   period1 = data/period1_matched.csv
//   period2 = data/period2_matched.csv
struct ExperimentPlan {
    std::uint64_t seed = 0;
    std::vector<ModelKind> models;
    bool all_pairs = true;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<PlanSet> sets;
    std::filesystem::path out_dir = "results";
};

ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan load_plan(const std::filesystem::path& file);

// Expands `all_pairs` and checks that every referenced set name exists,
// at least one pair and one model kind are present, and names are unique.
// Returns the concrete pair list in evaluation order.
std::vector<std::pair<std::string, std::string>> resolve_pairs(
    const ExperimentPlan& plan);

// The seed a single (model kind, train set) cell trains under, derived
// from the plan seed so cells are independent of evaluation order.
std::uint64_t cell_seed(std::uint64_t plan_seed, ModelKind kind,
                        const std::string& train_set);

struct MatrixCell {
    std::string train_set;
    std::string predict_set;
    ModelKind kind = ModelKind::rfr;
    MetricRow metrics;
    bool failed = false;       // training or prediction threw
    std::string error;
    bool non_causal = false;   // train set strictly later than predict set
};

struct MatrixResult {
    std::vector<std::string> set_order;  // plan order
    std::vector<MatrixCell> cells;
    bool complete_grid = false;  // every KxK combination present per kind
};

// Trains each (kind, train set) once, evaluates every requested pair,
// and keeps going on per-cell failures. Deterministic for a fixed plan.
MatrixResult run_matrix(const ExperimentPlan& plan);

// Same, with the data sets already in memory (keyed by plan set name).
MatrixResult run_matrix(const ExperimentPlan& plan,
                        const std::vector<MatchedDataSet>& sets);

// Columns: train_set,predict_set,model,mae,accuracy_pct,r2,pearson,kl,js
void write_metrics_csv(std::ostream& out,
                       const std::vector<MatrixCell>& cells);

// K×K MAE grid for one model kind, train sets as rows, predict sets as
// columns. Only meaningful when the result covers the complete grid.
void write_mae_matrix_csv(std::ostream& out, const MatrixResult& result,
                          ModelKind kind);

// Human-readable run report: per-pair metric table, per-kind MAE
// matrices, non-causal flags, and per-cell errors.
std::string format_summary(const MatrixResult& result);

// Runs the plan and writes metrics.csv, mae_matrix_<kind>.csv (complete
// grids only), and summary.txt under plan.out_dir.
MatrixResult run_matrix_to_dir(const ExperimentPlan& plan);

}  // namespace aircal
