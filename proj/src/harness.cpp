#include "driftnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "driftnet/theory.hpp"
#include "driftnet/trainer.hpp"

namespace driftnet {

namespace {

constexpr const char* kCsvVersion = "# sweep-csv-v1";
constexpr const char* kCsvHeader =
    "n,delta,n_delta,seed,emp_risk,gen_risk,gen_stderr,psi_hat,phi_n,remainder,depth,width,"
    "sparsity,sup_bound,status";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

void nan_metrics(RunRow& row) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.emp_risk = row.gen_risk = row.gen_stderr = row.psi_hat = nan;
    row.phi_n = row.remainder = row.sup_bound = nan;
    row.depth = row.width = 0;
    row.sparsity = 0;
}

RunRow run_one(const ExperimentConfig& cfg, const ConfinedDrift& truth, const SdeModel& model,
               const GridCell& cell, int cell_index, int seed_global) {
    RunRow row;
    row.n = cell.n;
    row.delta = cell.delta;
    row.n_delta = static_cast<double>(cell.n) * cell.delta;
    row.seed = seed_global;
    try {
        const std::uint64_t run_seed =
            derive_seed(derive_seed(cfg.seeds.base, static_cast<std::uint64_t>(cell_index)),
                        static_cast<std::uint64_t>(seed_global));
        const int substeps = resolve_substeps(cfg.eval, cell.delta);
        const std::vector<double> x0(model.dim, 0.0);
        const ObservedPath path =
            simulate_path(model, x0, cell.n, cell.delta, substeps, derive_seed(run_seed, 1));
        const RegressionSet data = make_regression_set(path, cfg.model.coord);

        const double K = cfg.smoothness.holder_k;
        const double F =
            cfg.architecture.sup_bound != 0.0 ? cfg.architecture.sup_bound : std::max(1.0, K);
        Architecture arch;
        std::int64_t s = 0;
        if (cfg.architecture.source == "auto") {
            RateParams rate;
            rate.cls = cfg.smoothness;
            rate.n_delta = row.n_delta;
            rate.delta = cell.delta;
            rate.consts = cfg.architecture.constants;
            const SelectedNetwork sel = select_architecture(rate, F, K);
            arch = sel.arch;
            s = sel.sparsity;
        } else {
            arch = make_architecture(cfg.model.dim, cfg.architecture.depth,
                                     cfg.architecture.width);
            s = cfg.architecture.sparsity;
        }

        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(run_seed, 2);
        const FitResult fit = fit_least_squares(data, arch, s, F, tc);
        const OptGapReport gap = estimate_opt_gap(fit, data, tc);

        // The estimand is the cube-supported component function; it agrees
        // with the drift coordinate on the cube, and off the cube both it and
        // every member of the network class vanish.
        const DriftTruth tfn = truth.inner;
        row.emp_risk = empirical_risk(fit.best_params, tfn, data);
        const RiskEstimate gen =
            generalization_risk(fit.best_params, tfn, model, cell.n, cell.delta, substeps,
                                cfg.eval.copies, derive_seed(run_seed, 3));
        row.gen_risk = gen.mean;
        row.gen_stderr = gen.std_error;
        row.psi_hat = gap.psi_hat;
        row.phi_n = phi_n(cfg.smoothness, row.n_delta).value;
        row.remainder = oracle_remainder(F, s, arch.depth, row.n_delta, cell.delta);
        row.depth = arch.depth;
        row.width = arch.widths[1];
        row.sparsity = s;
        row.sup_bound = F;
        row.status = "ok";
    } catch (const std::exception& e) {
        nan_metrics(row);
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

ConfinedDrift build_truth(const ExperimentConfig& cfg) {
    RecipeOptions opts;
    opts.poly_coeffs = cfg.model.coeffs;
    const CompositionSpec spec =
        build_composition(cfg.smoothness, recipe_from_name(cfg.model.recipe),
                          derive_seed(cfg.seeds.base, 0xC0DEULL), opts);
    return confine_drift(spec, cfg.model.coord, cfg.model.radial_rate);
}

std::string render_sweep_csv(const std::vector<RunRow>& rows) {
    std::string out;
    out += kCsvVersion;
    out += '\n';
    out += kCsvHeader;
    out += '\n';
    for (const RunRow& r : rows) {
        out += std::to_string(r.n) + ',' + fmt(r.delta) + ',' + fmt(r.n_delta) + ',' +
               std::to_string(r.seed) + ',' + fmt(r.emp_risk) + ',' + fmt(r.gen_risk) + ',' +
               fmt(r.gen_stderr) + ',' + fmt(r.psi_hat) + ',' + fmt(r.phi_n) + ',' +
               fmt(r.remainder) + ',' + std::to_string(r.depth) + ',' + std::to_string(r.width) +
               ',' + std::to_string(r.sparsity) + ',' + fmt(r.sup_bound) + ',' +
               sanitize(r.status) + '\n';
    }
    return out;
}

std::vector<RunRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvVersion)
        throw std::runtime_error("sweep csv: missing version line '" + std::string(kCsvVersion) +
                                 "'");
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("sweep csv: unexpected column header");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (int i = 0; i < 14; ++i) {
            const std::size_t c = line.find(',', pos);
            if (c == std::string::npos)
                throw std::runtime_error("sweep csv: malformed row: " + line);
            f.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        f.push_back(line.substr(pos));  // status, commas were sanitized away
        RunRow r;
        r.n = std::strtoll(f[0].c_str(), nullptr, 10);
        r.delta = std::strtod(f[1].c_str(), nullptr);
        r.n_delta = std::strtod(f[2].c_str(), nullptr);
        r.seed = static_cast<int>(std::strtol(f[3].c_str(), nullptr, 10));
        r.emp_risk = std::strtod(f[4].c_str(), nullptr);
        r.gen_risk = std::strtod(f[5].c_str(), nullptr);
        r.gen_stderr = std::strtod(f[6].c_str(), nullptr);
        r.psi_hat = std::strtod(f[7].c_str(), nullptr);
        r.phi_n = std::strtod(f[8].c_str(), nullptr);
        r.remainder = std::strtod(f[9].c_str(), nullptr);
        r.depth = static_cast<int>(std::strtol(f[10].c_str(), nullptr, 10));
        r.width = static_cast<int>(std::strtol(f[11].c_str(), nullptr, 10));
        r.sparsity = std::strtoll(f[12].c_str(), nullptr, 10);
        r.sup_bound = std::strtod(f[13].c_str(), nullptr);
        r.status = f[14];
        rows.push_back(std::move(r));
    }
    return rows;
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    const std::string out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
    std::filesystem::create_directories(out_dir);

    const ConfinedDrift truth = build_truth(cfg);
    const SdeModel model = truth.as_model(cfg.model.noise);

    struct Job {
        int cell;
        int seed;
    };
    std::vector<Job> jobs_list;
    for (int c = 0; c < static_cast<int>(cfg.grid.size()); ++c)
        for (int s = 0; s < cfg.seeds.count; ++s)
            jobs_list.push_back({c, opts.seed_offset + s});

    RunReport rep;
    rep.rows.resize(jobs_list.size());
    const int workers =
        std::max(1, std::min(opts.jobs, static_cast<int>(jobs_list.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs_list.size(); ++i)
            rep.rows[i] = run_one(cfg, truth, model, cfg.grid[jobs_list[i].cell],
                                  jobs_list[i].cell, jobs_list[i].seed);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs_list.size()) return;
                    rep.rows[i] = run_one(cfg, truth, model, cfg.grid[jobs_list[i].cell],
                                          jobs_list[i].cell, jobs_list[i].seed);
                }
            });
        for (auto& t : pool) t.join();
    }

    for (const RunRow& r : rep.rows)
        if (r.status != "ok") ++rep.failed;

    // per-cell mean generalization risk over successful seeds
    std::vector<SweepCell> cells;
    for (int c = 0; c < static_cast<int>(cfg.grid.size()); ++c) {
        SweepCell sc;
        sc.n = cfg.grid[c].n;
        sc.delta = cfg.grid[c].delta;
        double sum = 0.0;
        int cnt = 0;
        for (std::size_t i = 0; i < jobs_list.size(); ++i)
            if (jobs_list[i].cell == c && rep.rows[i].status == "ok") {
                sum += rep.rows[i].gen_risk;
                ++cnt;
            }
        sc.mean_risk = cnt > 0 ? sum / cnt : std::numeric_limits<double>::quiet_NaN();
        cells.push_back(sc);
    }
    try {
        rep.sweep = rate_sweep(cells, cfg.smoothness);
        rep.regime_ok = true;
    } catch (const std::invalid_argument&) {
        rep.regime_ok = false;
    }

    rep.csv_path = out_dir + "/sweep.csv";
    rep.summary_path = out_dir + "/summary.txt";
    write_file(rep.csv_path, render_sweep_csv(rep.rows));
    write_file(out_dir + "/config_echo.json", canonical_text(cfg));

    std::string sm;
    sm += "cells=" + std::to_string(cfg.grid.size()) + '\n';
    sm += "seeds_per_cell=" + std::to_string(cfg.seeds.count) + '\n';
    sm += "rows=" + std::to_string(rep.rows.size()) + '\n';
    sm += "failed=" + std::to_string(rep.failed) + '\n';
    sm += "regime_ok=" + std::to_string(rep.regime_ok ? 1 : 0) + '\n';
    for (std::size_t c = 0; c < cells.size(); ++c) {
        sm += "cell" + std::to_string(c) + "_n_delta=" +
              fmt(static_cast<double>(cells[c].n) * cells[c].delta) + '\n';
        sm += "cell" + std::to_string(c) + "_mean_gen_risk=" + fmt(cells[c].mean_risk) + '\n';
    }
    if (rep.regime_ok) {
        sm += "slope_defined=" + std::to_string(rep.sweep.slope_defined ? 1 : 0) + '\n';
        sm += "slope=" + fmt(rep.sweep.slope) + '\n';
        sm += "intercept=" + fmt(rep.sweep.intercept) + '\n';
        sm += "theory_exponent=" + fmt(rep.sweep.theory_exponent) + '\n';
        sm += "points_used=" + std::to_string(rep.sweep.points_used) + '\n';
        sm += "excluded_cells=" + std::to_string(rep.sweep.excluded_cells.size()) + '\n';
    }
    double psi_max = 0.0;
    bool any_ok = false;
    for (const RunRow& r : rep.rows)
        if (r.status == "ok") {
            psi_max = std::max(psi_max, r.psi_hat);
            any_ok = true;
        }
    sm += "psi_hat_max=" + (any_ok ? fmt(psi_max) : std::string("nan")) + '\n';
    write_file(rep.summary_path, sm);

    rep.exit_code = rep.failed > 0 ? 2 : 0;
    return rep;
}

void emit_plot_data(const std::string& csv_file, const std::string& out_file) {
    std::ifstream in(csv_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + csv_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::vector<RunRow> rows = parse_sweep_csv(buf.str());
    if (rows.empty()) throw std::runtime_error("sweep csv has no data rows: " + csv_file);

    struct Agg {
        std::int64_t n;
        double delta;
        double sum = 0.0;
        int cnt = 0;
    };
    std::vector<Agg> cells;
    int skipped_rows = 0;
    for (const RunRow& r : rows) {
        if (r.status != "ok" || !std::isfinite(r.gen_risk)) {
            ++skipped_rows;
            continue;
        }
        auto it = std::find_if(cells.begin(), cells.end(), [&](const Agg& a) {
            return a.n == r.n && a.delta == r.delta;
        });
        if (it == cells.end()) {
            cells.push_back({r.n, r.delta, r.gen_risk, 1});
        } else {
            it->sum += r.gen_risk;
            ++it->cnt;
        }
    }
    if (cells.empty()) throw std::runtime_error("sweep csv has no usable rows: " + csv_file);

    std::string out;
    out += "# ln-ln rate points aggregated from sweep data\n";
    out += "# columns: ln_n_delta ln_mean_gen_risk\n";
    int excluded_cells = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    std::string pts;
    for (const Agg& a : cells) {
        const double mean = a.sum / a.cnt;
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            ++excluded_cells;
            continue;
        }
        const double x = std::log(static_cast<double>(a.n) * a.delta);
        const double y = std::log(mean);
        pts += fmt(x) + " " + fmt(y) + "\n";
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    out += "# rows_skipped=" + std::to_string(skipped_rows) +
           " cells_excluded=" + std::to_string(excluded_cells) + '\n';
    out += pts;
    if (m >= 2) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / m;
        out += "# fit: slope=" + fmt(slope) + " intercept=" + fmt(intercept) +
               " points=" + std::to_string(m) + '\n';
    } else {
        out += "# fit: undefined (need >= 2 positive cells, have " + std::to_string(m) + ")\n";
    }
    write_file(out_file, out);
}

}  // namespace driftnet
