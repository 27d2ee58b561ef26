#include "driftnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace driftnet {

namespace {

TrainConfig resolve(const TrainConfig& cfg, std::int64_t n) {
    if (cfg.steps < 1) throw std::invalid_argument("trainer: steps must be >= 1");
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("trainer: step size must be > 0");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        throw std::invalid_argument("trainer: momentum must lie in [0, 1)");
    if (cfg.restarts < 1) throw std::invalid_argument("trainer: restarts must be >= 1");
    if (cfg.projection_every < 1)
        throw std::invalid_argument("trainer: projection cadence must be >= 1");
    if (cfg.batch < 0) throw std::invalid_argument("trainer: batch must be >= 0");
    TrainConfig r = cfg;
    if (r.decay <= 0.0) r.decay = std::max<double>(1.0, static_cast<double>(cfg.steps) / 2.0);
    if (r.batch == 0 || r.batch > n) r.batch = n;
    return r;
}

// Step-size normalizer. The raw gradient scales with the residual, and the
// targets (X_{k+1}-X_k)/delta carry diffusion noise of RMS ~ sigma/sqrt(delta),
// so an unnormalized step that is stable at delta = 0.1 saturates every
// parameter at the clamp when delta = 0.001. Dividing the step by the target
// RMS (floored at 1 so well-scaled problems are untouched) makes one
// step_size usable across sampling grids.
double target_scale(const RegressionSet& data) {
    double sumsq = 0.0;
    for (double y : data.targets) sumsq += y * y;
    const double rms = std::sqrt(sumsq / static_cast<double>(data.n));
    return 1.0 / std::max(1.0, rms);
}

void axpy_buffers(ParamBuffers& y, double a, const ParamBuffers& x) {
    for (std::size_t j = 0; j < y.weights.size(); ++j)
        for (std::size_t i = 0; i < y.weights[j].size(); ++i)
            y.weights[j][i] += a * x.weights[j][i];
    for (std::size_t j = 0; j < y.shifts.size(); ++j)
        for (std::size_t i = 0; i < y.shifts[j].size(); ++i)
            y.shifts[j][i] += a * x.shifts[j][i];
}

void scale_buffers(ParamBuffers& y, double a) {
    for (auto& w : y.weights)
        for (double& v : w) v *= a;
    for (auto& s : y.shifts)
        for (double& v : s) v *= a;
}

void add_and_clip(NetworkParams& p, const ParamBuffers& v) {
    for (std::size_t j = 0; j < p.weights.size(); ++j)
        for (std::size_t i = 0; i < p.weights[j].size(); ++i) {
            double t = p.weights[j][i] + v.weights[j][i];
            p.weights[j][i] = std::clamp(t, -1.0, 1.0);
        }
    for (std::size_t j = 0; j < p.shifts.size(); ++j)
        for (std::size_t i = 0; i < p.shifts[j].size(); ++i) {
            double t = p.shifts[j][i] + v.shifts[j][i];
            p.shifts[j][i] = std::clamp(t, -1.0, 1.0);
        }
}

// Per-step displacement cap. Early in training the residual is large and
// coherent, and momentum amplifies it about tenfold; an uncapped first phase
// can push every parameter into the [-1, 1] clamp within a handful of steps,
// closing all ReLU gates and leaving the zero function (zero gradient) with
// no way back. Capping the largest single-entry move keeps the box traversal
// slower than the gradient direction refresh.
constexpr double kMaxEntryStep = 0.05;

void clip_update(ParamBuffers& v) {
    double vmax = 0.0;
    for (const auto& w : v.weights)
        for (double x : w) vmax = std::max(vmax, std::abs(x));
    for (const auto& s : v.shifts)
        for (double x : s) vmax = std::max(vmax, std::abs(x));
    if (vmax > kMaxEntryStep) scale_buffers(v, kMaxEntryStep / vmax);
}

void mask_buffers(ParamBuffers& v, const ParamMask& m) {
    for (std::size_t j = 0; j < v.weights.size(); ++j)
        for (std::size_t i = 0; i < v.weights[j].size(); ++i)
            if (!m.weights[j][i]) v.weights[j][i] = 0.0;
    for (std::size_t j = 0; j < v.shifts.size(); ++j)
        for (std::size_t i = 0; i < v.shifts[j].size(); ++i)
            if (!m.shifts[j][i]) v.shifts[j][i] = 0.0;
}

bool stationary_zero(const RestartState& st) {
    if (count_nonzero(st.params) != 0) return false;
    for (const auto& w : st.velocity.weights)
        for (double v : w)
            if (v != 0.0) return false;
    for (const auto& s : st.velocity.shifts)
        for (double v : s)
            if (v != 0.0) return false;
    return true;
}

// Advances one restart from t_begin to t_end. The working parameters may use
// the relaxed budget while t < relax_until; every projection event scores a
// hard-projected copy so best tracking only ever sees feasible candidates.
void run_steps(RestartState& st, BatchEngine& engine, const RegressionSet& data,
               const TrainConfig& cfg, std::int64_t s_hard, std::int64_t t_begin,
               std::int64_t t_end, std::int64_t relax_until, NetworkParams& best, double& best_q,
               const std::function<void(std::int64_t, double)>& on_event) {
    const std::int64_t n = data.n;
    const std::int64_t B = cfg.batch;
    const double eta0 = cfg.step_size * target_scale(data);
    ParamBuffers grad = ParamBuffers::zeros_like(st.params.arch);
    const ParamMask dense = ParamMask::all(st.params.arch);

    for (std::int64_t t = t_begin; t < t_end; ++t) {
        const double lr = eta0 / (1.0 + static_cast<double>(t) / cfg.decay);
        const std::int64_t start = (t * B) % n;
        const std::int64_t budget = t < relax_until ? 4 * s_hard : s_hard;
        const bool event =
            t % cfg.projection_every == 0 || t == relax_until || t == t_end - 1;

        if (event) {
            engine.gradient(st.params, dense, data, start, B, grad);
            scale_buffers(st.velocity, cfg.momentum);
            axpy_buffers(st.velocity, -lr, grad);
            clip_update(st.velocity);
            add_and_clip(st.params, st.velocity);
            st.params = project_params(st.params, budget, 1.0);
            st.mask = ParamMask::support(st.params);
            mask_buffers(st.velocity, st.mask);

            NetworkParams cand = project_params(st.params, s_hard, 1.0);
            const double q = engine.loss(cand, data, 0, n);
            if (q < best_q) {
                best_q = q;
                best = std::move(cand);
            }
            if (on_event) on_event(t, q);
        } else {
            engine.gradient(st.params, st.mask, data, start, B, grad);
            scale_buffers(st.velocity, cfg.momentum);
            axpy_buffers(st.velocity, -lr, grad);
            clip_update(st.velocity);
            add_and_clip(st.params, st.velocity);
        }
    }
    st.next_step = t_end;
}

}  // namespace

FitResult fit_least_squares(const RegressionSet& data, const Architecture& arch, std::int64_t s,
                            double F, const TrainConfig& cfg) {
    arch.validate();
    if (data.n < 1) throw std::invalid_argument("trainer: empty data");
    if (data.dim != arch.input_dim())
        throw std::invalid_argument("trainer: data dimension does not match architecture");
    if (s < 2) throw std::invalid_argument("trainer: sparsity budget must be >= 2");
    if (!(F >= 1.0)) throw std::invalid_argument("trainer: sup bound F must be >= 1");

    FitResult res;
    res.resolved = resolve(cfg, data.n);
    const TrainConfig& rc = res.resolved;
    const std::int64_t relax_until = rc.steps / 2;

    BatchEngine engine(arch, static_cast<int>(rc.batch));
    res.best_loss = std::numeric_limits<double>::infinity();
    res.best_params = zero_network(arch, s, F);

    for (int r = 0; r < rc.restarts; ++r) {
        RestartState st;
        st.velocity = ParamBuffers::zeros_like(arch);
        double restart_best = std::numeric_limits<double>::infinity();

        if (r == 0) {
            // The zero network is a stationary point of these dynamics (all
            // activations vanish, so every gradient is exactly zero); score
            // it once instead of stepping in place.
            st.params = zero_network(arch, s, F);
            st.mask = ParamMask::support(st.params);
            st.next_step = rc.steps;
            const double q0 = engine.loss(st.params, data, 0, data.n);
            restart_best = q0;
            if (q0 < res.best_loss) {
                res.best_loss = q0;
                res.best_params = st.params;
            }
            res.trace.push_back({0, res.best_loss});
        } else {
            const InitScheme scheme =
                r % 2 == 1 ? InitScheme::zeros_plus_sparse : InitScheme::uniform_pm1_scaled;
            st.params = init_params(arch, 4 * s, F, scheme, derive_seed(rc.seed, r),
                                    /*core=*/s);
            st.mask = ParamMask::support(st.params);
            const std::int64_t base = static_cast<std::int64_t>(r) * rc.steps;
            NetworkParams best_local = res.best_params;
            double best_local_q = std::numeric_limits<double>::infinity();
            run_steps(st, engine, data, rc, s, 0, rc.steps, relax_until, best_local, best_local_q,
                      [&](std::int64_t t, double q) {
                          restart_best = std::min(restart_best, q);
                          if (q < res.best_loss) {
                              res.best_loss = q;
                              res.best_params = best_local;
                          }
                          res.trace.push_back({base + t, res.best_loss});
                      });
        }
        res.restart_losses.push_back(restart_best);
        res.states.push_back(std::move(st));
    }
    return res;
}

OptGapReport estimate_opt_gap(const FitResult& fit, const RegressionSet& data,
                              const TrainConfig& cfg) {
    if (fit.states.empty()) throw std::invalid_argument("estimate_opt_gap: fit has no restarts");
    if (data.n < 1) throw std::invalid_argument("estimate_opt_gap: empty data");
    const TrainConfig& rc = fit.resolved;
    const std::int64_t extra = cfg.steps > 0 ? cfg.steps : rc.steps;
    const std::int64_t s_hard = fit.best_params.sparsity_budget;

    OptGapReport rep;
    rep.fit_loss = fit.best_loss;
    rep.extra_steps = extra;

    BatchEngine engine(fit.best_params.arch, static_cast<int>(rc.batch));
    NetworkParams floor_params = fit.best_params;
    double floor = fit.best_loss;  // carry the fit's best into the floor

    for (const RestartState& saved : fit.states) {
        if (stationary_zero(saved)) continue;
        RestartState st = saved;
        run_steps(st, engine, data, rc, s_hard, st.next_step, st.next_step + extra,
                  /*relax_until=*/0, floor_params, floor, nullptr);
    }

    rep.floor_loss = floor;
    rep.psi_hat = std::max(0.0, rep.fit_loss - rep.floor_loss);
    return rep;
}

}  // namespace driftnet
