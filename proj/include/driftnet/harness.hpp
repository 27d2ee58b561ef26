#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftnet/config.hpp"
#include "driftnet/confined.hpp"
#include "driftnet/risk.hpp"

namespace driftnet {

// One (grid cell, seed) run of the sweep. Doubles are NaN when status is not
// "ok"; the CSV writer prints them with %.17g so reruns are byte-identical.
struct RunRow {
    std::int64_t n = 0;
    double delta = 0.0;
    double n_delta = 0.0;
    int seed = 0;  // global seed index (seed offset + local index)
    double emp_risk = 0.0;
    double gen_risk = 0.0;
    double gen_stderr = 0.0;
    double psi_hat = 0.0;
    double phi_n = 0.0;
    double remainder = 0.0;
    int depth = 0;
    int width = 0;
    std::int64_t sparsity = 0;
    double sup_bound = 0.0;
    std::string status = "ok";  // "ok" or "failed: <reason>"
};

struct RunReport {
    std::vector<RunRow> rows;  // cell-major, then seed
    SweepSummary sweep;        // over cells with >= 1 ok row; meaningless if !regime_ok
    bool regime_ok = false;    // grid satisfies the rate-sweep regime
    int failed = 0;
    std::string csv_path;
    std::string summary_path;
    int exit_code = 0;  // 0 all rows ok, 2 otherwise
};

struct RunOptions {
    std::string out_dir;  // empty -> cfg.out_dir
    int seed_offset = 0;
    int jobs = 1;
};

// Builds the ground-truth model a config describes: composition recipe,
// confined into an ergodic drift. The function composed is deterministic in
// cfg.seeds.base, so every cell and seed of one experiment shares the truth.
ConfinedDrift build_truth(const ExperimentConfig& cfg);

// Runs the whole sweep: per cell and seed, simulate, regress, pick the
// architecture, fit, estimate the optimization gap, evaluate risks, then
// write <out>/sweep.csv, <out>/summary.txt and <out>/config_echo.json.
// A failing run poisons only its own row. jobs > 1 distributes runs over
// threads; rows land in deterministic slots so outputs don't depend on jobs.
RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Rewrites a sweep CSV as gnuplot-style ln-ln points with the fitted line in
// comments. Rows that failed or have nonpositive risk are excluded (counted
// in a comment). Throws if no usable row remains.
void emit_plot_data(const std::string& csv_file, const std::string& out_file);

// CSV helpers shared by the CLI and tests.
std::string render_sweep_csv(const std::vector<RunRow>& rows);
std::vector<RunRow> parse_sweep_csv(const std::string& text);

}  // namespace driftnet
