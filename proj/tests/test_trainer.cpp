#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "driftnet/network.hpp"
#include "driftnet/sde.hpp"
#include "driftnet/trainer.hpp"

using namespace driftnet;
using doctest::Approx;

namespace {

// Deterministic regression targets around 1 - x with a small wiggle standing
// in for the martingale noise.
RegressionSet wiggle_set(std::int64_t n = 256) {
    RegressionSet d;
    d.coord = 1;
    d.dim = 1;
    d.n = n;
    d.delta = 0.01;
    d.inputs.resize(static_cast<std::size_t>(n));
    d.targets.resize(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        double x = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        d.inputs[static_cast<std::size_t>(k)] = x;
        d.targets[static_cast<std::size_t>(k)] =
            (1.0 - x) + 0.05 * std::sin(37.0 * x) + 0.02 * std::cos(113.0 * x);
    }
    return d;
}

TrainConfig small_cfg() {
    TrainConfig cfg;
    cfg.steps = 120;
    cfg.step_size = 0.1;
    cfg.momentum = 0.9;
    cfg.batch = 64;
    cfg.restarts = 3;
    cfg.projection_every = 10;
    cfg.seed = 7;
    return cfg;
}

double zero_net_loss(const RegressionSet& d) {
    double acc = 0.0;
    for (double y : d.targets) acc += y * y;
    return acc / static_cast<double>(d.n);
}

}  // namespace

TEST_SUITE("trainer") {
    TEST_CASE("fit returns a feasible network that beats the empty model") {
        RegressionSet d = wiggle_set();
        Architecture arch = make_architecture(1, 2, 6);
        const std::int64_t s = 18;
        FitResult fit = fit_least_squares(d, arch, s, 1.0, small_cfg());

        CHECK(validate_params(fit.best_params).empty());
        CHECK(fit.best_params.sparsity_budget == s);
        CHECK(count_nonzero(fit.best_params) <= s);
        CHECK(fit.best_params.sup_bound == 1.0);

        REQUIRE(fit.restart_losses.size() == 3);
        CHECK(fit.restart_losses[0] == Approx(zero_net_loss(d)).epsilon(1e-12));
        CHECK(fit.best_loss <= fit.restart_losses[0]);
        // the data is essentially 1 - x; any useful fit cuts the empty-model
        // loss by a wide margin
        CHECK(fit.best_loss < 0.5 * fit.restart_losses[0]);

        // the committed loss is the minimum over restarts and is reproduced by
        // a fresh engine evaluation
        double best_restart = fit.restart_losses[0];
        for (double r : fit.restart_losses) best_restart = std::min(best_restart, r);
        CHECK(fit.best_loss == best_restart);
        BatchEngine eng(arch, 256);
        CHECK(eng.loss(fit.best_params, d, 0, d.n) == Approx(fit.best_loss).epsilon(1e-12));
    }

    TEST_CASE("trace is monotone and spans every restart") {
        RegressionSet d = wiggle_set();
        Architecture arch = make_architecture(1, 2, 6);
        TrainConfig cfg = small_cfg();
        FitResult fit = fit_least_squares(d, arch, 12, 1.0, cfg);

        REQUIRE(!fit.trace.empty());
        CHECK(fit.trace.front().step == 0);
        for (std::size_t i = 1; i < fit.trace.size(); ++i) {
            CHECK(fit.trace[i].best_loss <= fit.trace[i - 1].best_loss);
            CHECK(fit.trace[i].step > fit.trace[i - 1].step);
        }
        CHECK(fit.trace.back().best_loss == fit.best_loss);
        // restart-major global step indexing reaches into the last restart
        CHECK(fit.trace.back().step >= cfg.steps * (cfg.restarts - 1));
        REQUIRE(fit.states.size() == 3);
        CHECK(fit.states[1].next_step == cfg.steps);
    }

    TEST_CASE("fit is bit-exact deterministic") {
        RegressionSet d = wiggle_set();
        Architecture arch = make_architecture(1, 2, 6);
        TrainConfig cfg = small_cfg();
        FitResult a = fit_least_squares(d, arch, 12, 1.0, cfg);
        FitResult b = fit_least_squares(d, arch, 12, 1.0, cfg);
        CHECK(a.best_loss == b.best_loss);
        CHECK(a.best_params.weights == b.best_params.weights);
        CHECK(a.best_params.shifts == b.best_params.shifts);
        REQUIRE(a.trace.size() == b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) {
            CHECK(a.trace[i].step == b.trace[i].step);
            CHECK(a.trace[i].best_loss == b.trace[i].best_loss);
        }
        CHECK(a.restart_losses == b.restart_losses);

        TrainConfig other = cfg;
        other.seed = 8;
        FitResult c = fit_least_squares(d, arch, 12, 1.0, other);
        CHECK(c.best_params.weights != a.best_params.weights);
    }

    TEST_CASE("resolved config fills the documented defaults") {
        RegressionSet d = wiggle_set(64);
        Architecture arch = make_architecture(1, 1, 3);
        TrainConfig cfg;
        cfg.steps = 40;
        cfg.restarts = 2;
        cfg.decay = 0.0;
        cfg.batch = 0;
        FitResult fit = fit_least_squares(d, arch, 6, 1.0, cfg);
        CHECK(fit.resolved.decay == 20.0);
        CHECK(fit.resolved.batch == 64);
        CHECK(fit.resolved.steps == 40);

        TrainConfig over = cfg;
        over.batch = 1000;  // larger than the data wraps back to full batches
        FitResult fit2 = fit_least_squares(d, arch, 6, 1.0, over);
        CHECK(fit2.resolved.batch == 64);
    }

    TEST_CASE("config validation rejects nonsense") {
        RegressionSet d = wiggle_set(32);
        Architecture arch = make_architecture(1, 1, 3);
        TrainConfig cfg;

        cfg.steps = 0;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.step_size = 0.0;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.momentum = 1.0;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.momentum = -0.1;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.restarts = 0;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.projection_every = 0;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);
        cfg = TrainConfig{};
        cfg.batch = -1;
        CHECK_THROWS_AS(fit_least_squares(d, arch, 6, 1.0, cfg), std::invalid_argument);

        // input dimension mismatch propagates from the engine
        RegressionSet wide = wiggle_set(32);
        wide.dim = 2;
        wide.inputs.resize(64, 0.5);
        CHECK_THROWS_AS(fit_least_squares(wide, arch, 6, 1.0, TrainConfig{}),
                        std::invalid_argument);
    }

    TEST_CASE("optimization gap is nonnegative and zero for the stationary-only fit") {
        RegressionSet d = wiggle_set();
        Architecture arch = make_architecture(1, 2, 6);
        TrainConfig cfg = small_cfg();
        FitResult fit = fit_least_squares(d, arch, 12, 1.0, cfg);

        OptGapReport gap = estimate_opt_gap(fit, d, cfg);
        CHECK(gap.psi_hat >= 0.0);
        CHECK(gap.fit_loss == fit.best_loss);
        CHECK(gap.floor_loss <= fit.best_loss);
        CHECK(gap.psi_hat == Approx(std::max(0.0, gap.fit_loss - gap.floor_loss)).epsilon(1e-15));
        CHECK(gap.extra_steps == cfg.steps);

        // a single restart is the zero network: stationary, nothing to resume
        TrainConfig solo = cfg;
        solo.restarts = 1;
        FitResult zfit = fit_least_squares(d, arch, 12, 1.0, solo);
        CHECK(zfit.best_loss == Approx(zero_net_loss(d)).epsilon(1e-12));
        OptGapReport zgap = estimate_opt_gap(zfit, d, solo);
        CHECK(zgap.psi_hat == 0.0);
        CHECK(zgap.floor_loss == zfit.best_loss);
    }

    TEST_CASE("opt gap estimation is deterministic") {
        RegressionSet d = wiggle_set();
        Architecture arch = make_architecture(1, 2, 6);
        TrainConfig cfg = small_cfg();
        FitResult fit = fit_least_squares(d, arch, 12, 1.0, cfg);
        OptGapReport a = estimate_opt_gap(fit, d, cfg);
        OptGapReport b = estimate_opt_gap(fit, d, cfg);
        CHECK(a.psi_hat == b.psi_hat);
        CHECK(a.floor_loss == b.floor_loss);
    }
}
