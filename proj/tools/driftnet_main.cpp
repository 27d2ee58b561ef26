#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "driftnet/config.hpp"
#include "driftnet/harness.hpp"
#include "driftnet/theory.hpp"
#include "driftnet/trainer.hpp"

namespace {

using namespace driftnet;

struct Common {
    std::string config;
    std::string out_dir;
    int seed_offset = 0;
    int jobs = 1;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string resolve_out(const ExperimentConfig& cfg, const Common& c) {
    return c.out_dir.empty() ? cfg.out_dir : c.out_dir;
}

int cmd_simulate(const ExperimentConfig& cfg, const Common& c) {
    const std::string out = resolve_out(cfg, c);
    std::filesystem::create_directories(out);
    const ConfinedDrift truth = build_truth(cfg);
    const SdeModel model = truth.as_model(cfg.model.noise);
    for (int cell = 0; cell < static_cast<int>(cfg.grid.size()); ++cell) {
        for (int s = 0; s < cfg.seeds.count; ++s) {
            const int seed_global = c.seed_offset + s;
            const std::uint64_t run_seed =
                derive_seed(derive_seed(cfg.seeds.base, static_cast<std::uint64_t>(cell)),
                            static_cast<std::uint64_t>(seed_global));
            const std::vector<double> x0(model.dim, 0.0);
            const GridCell& g = cfg.grid[cell];
            const ObservedPath path =
                simulate_path(model, x0, g.n, g.delta, resolve_substeps(cfg.eval, g.delta),
                              derive_seed(run_seed, 1));
            const std::string file = out + "/path_cell" + std::to_string(cell) + "_seed" +
                                     std::to_string(seed_global) + ".bin";
            write_path(path, file);
            std::cout << "wrote " << file << " n=" << g.n << " delta=" << fmt(g.delta) << "\n";
        }
    }
    return 0;
}

int cmd_fit(const ExperimentConfig& cfg, const Common& c) {
    const std::string out = resolve_out(cfg, c);
    std::filesystem::create_directories(out);
    const ConfinedDrift truth = build_truth(cfg);
    const SdeModel model = truth.as_model(cfg.model.noise);
    const GridCell& g = cfg.grid.front();
    const int seed_global = c.seed_offset;
    const std::uint64_t run_seed = derive_seed(derive_seed(cfg.seeds.base, 0ULL),
                                               static_cast<std::uint64_t>(seed_global));
    const int substeps = resolve_substeps(cfg.eval, g.delta);
    const std::vector<double> x0(model.dim, 0.0);
    const ObservedPath path =
        simulate_path(model, x0, g.n, g.delta, substeps, derive_seed(run_seed, 1));
    const RegressionSet data = make_regression_set(path, cfg.model.coord);

    const double K = cfg.smoothness.holder_k;
    const double F =
        cfg.architecture.sup_bound != 0.0 ? cfg.architecture.sup_bound : std::max(1.0, K);
    Architecture arch;
    std::int64_t s = 0;
    if (cfg.architecture.source == "auto") {
        RateParams rate{cfg.smoothness, static_cast<double>(g.n) * g.delta, g.delta,
                        cfg.architecture.constants};
        const SelectedNetwork sel = select_architecture(rate, F, K);
        arch = sel.arch;
        s = sel.sparsity;
    } else {
        arch = make_architecture(cfg.model.dim, cfg.architecture.depth, cfg.architecture.width);
        s = cfg.architecture.sparsity;
    }

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(run_seed, 2);
    const FitResult fit = fit_least_squares(data, arch, s, F, tc);
    const OptGapReport gap = estimate_opt_gap(fit, data, tc);
    const RiskEstimate gen = generalization_risk(fit.best_params, truth.inner, model, g.n,
                                                 g.delta, substeps, cfg.eval.copies,
                                                 derive_seed(run_seed, 3));

    const std::string net_file = out + "/network.net";
    write_network(fit.best_params, net_file);

    std::cout << "network=" << net_file << "\n";
    std::cout << "depth=" << arch.depth << "\n";
    std::cout << "width=" << arch.widths[1] << "\n";
    std::cout << "sparsity=" << s << "\n";
    std::cout << "nonzeros=" << count_nonzero(fit.best_params) << "\n";
    std::cout << "sup_bound=" << fmt(F) << "\n";
    std::cout << "best_loss=" << fmt(fit.best_loss) << "\n";
    std::cout << "psi_hat=" << fmt(gap.psi_hat) << "\n";
    std::cout << "emp_risk=" << fmt(empirical_risk(fit.best_params, truth.inner, data)) << "\n";
    std::cout << "gen_risk=" << fmt(gen.mean) << "\n";
    std::cout << "gen_stderr=" << fmt(gen.std_error) << "\n";
    return 0;
}

int cmd_theory(const ExperimentConfig& cfg, const Common&) {
    const double K = cfg.smoothness.holder_k;
    const double F =
        cfg.architecture.sup_bound != 0.0 ? cfg.architecture.sup_bound : std::max(1.0, K);
    std::cout << "c_l_lower=" << fmt(c_l_lower(cfg.smoothness)) << "\n";
    std::cout << "rate_exponent=" << fmt(rate_exponent(cfg.smoothness)) << "\n";
    for (int cell = 0; cell < static_cast<int>(cfg.grid.size()); ++cell) {
        const GridCell& g = cfg.grid[cell];
        RateParams rate{cfg.smoothness, static_cast<double>(g.n) * g.delta, g.delta,
                        cfg.architecture.constants};
        const PhiResult phi = phi_n(rate);
        std::cout << "cell=" << cell << " n=" << g.n << " delta=" << fmt(g.delta)
                  << " n_delta=" << fmt(rate.n_delta) << "\n";
        std::cout << "  phi_n=" << fmt(phi.value) << " stage=" << phi.i_star << "\n";
        try {
            const SelectedNetwork sel = select_architecture(rate, F, K);
            std::cout << "  depth=" << sel.arch.depth << " width=" << sel.arch.widths[1]
                      << " sparsity=" << sel.sparsity << " sup_bound=" << fmt(F) << "\n";
            const ConditionReport rep = check_conditions(sel.arch, sel.sparsity, rate, F, K);
            for (const Condition& cond : rep.conditions)
                std::cout << "  condition_" << cond.name << "=" << (cond.ok ? 1 : 0)
                          << " slack=" << fmt(cond.slack) << "\n";
            std::cout << "  remainder="
                      << fmt(oracle_remainder(F, sel.sparsity, sel.arch.depth, rate.n_delta,
                                              g.delta))
                      << "\n";
        } catch (const std::exception& e) {
            std::cout << "  selection=infeasible reason=" << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const Common& c) {
    RunOptions opts;
    opts.out_dir = c.out_dir;
    opts.seed_offset = c.seed_offset;
    opts.jobs = c.jobs;
    const RunReport rep = run_experiment(cfg, opts);
    std::cout << "csv=" << rep.csv_path << "\n";
    std::cout << "summary=" << rep.summary_path << "\n";
    std::cout << "rows=" << rep.rows.size() << " failed=" << rep.failed << "\n";
    std::cout << "regime_ok=" << (rep.regime_ok ? 1 : 0) << "\n";
    if (rep.regime_ok && rep.sweep.slope_defined) {
        std::cout << "slope=" << fmt(rep.sweep.slope) << "\n";
        std::cout << "theory_exponent=" << fmt(rep.sweep.theory_exponent) << "\n";
    }
    return rep.exit_code;
}

int cmd_plot_data(const ExperimentConfig& cfg, const Common& c) {
    const std::string out = resolve_out(cfg, c);
    const std::string csv = out + "/sweep.csv";
    const std::string dat = out + "/plot.dat";
    emit_plot_data(csv, dat);
    std::cout << "wrote " << dat << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drift estimation with sparse deep ReLU networks"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&common](CLI::App* sub, bool with_jobs) {
        sub->add_option("--config", common.config, "experiment config (JSON)")->required();
        sub->add_option("--out-dir", common.out_dir, "override the config's out_dir");
        sub->add_option("--seed-offset", common.seed_offset, "shift the global seed indices");
        if (with_jobs) sub->add_option("--jobs", common.jobs, "worker threads");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "write observation paths for the grid");
    add_common(simulate, false);
    CLI::App* fit = app.add_subcommand("fit", "fit one cell and write the network");
    add_common(fit, false);
    CLI::App* theory = app.add_subcommand("theory", "print rates, selections and conditions");
    add_common(theory, false);
    CLI::App* sweep = app.add_subcommand("sweep", "run the full experiment grid");
    add_common(sweep, true);
    CLI::App* plot = app.add_subcommand("plot-data", "turn sweep.csv into ln-ln plot points");
    add_common(plot, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const driftnet::ExperimentConfig cfg = driftnet::load_config(common.config);
        if (simulate->parsed()) return cmd_simulate(cfg, common);
        if (fit->parsed()) return cmd_fit(cfg, common);
        if (theory->parsed()) return cmd_theory(cfg, common);
        if (sweep->parsed()) return cmd_sweep(cfg, common);
        if (plot->parsed()) return cmd_plot_data(cfg, common);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const driftnet::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
