#pragma once

#include <cstdint>
#include <vector>

#include "driftnet/network.hpp"
#include "driftnet/sde.hpp"

namespace driftnet {

// Projected heavy-ball least squares over the sparse clipped network class.
struct TrainConfig {
    std::int64_t steps = 200;           // gradient steps per restart
    double step_size = 0.05;            // base rate; the applied step is
                                        // step_size / max(1, rms(targets)),
                                        // so one value works across deltas
    double decay = 0.0;                 // lr = eta0/(1 + t/decay); 0 -> steps/2
    double momentum = 0.9;
    std::int64_t batch = 0;             // contiguous window size; 0 -> full data
    int restarts = 5;                   // restart 0 is always the zero network
    std::int64_t projection_every = 10; // sparsity projection cadence
    std::uint64_t seed = 1;
};

struct TracePoint {
    std::int64_t step = 0;   // global step index (restart-major)
    double best_loss = 0.0;  // best feasible empirical loss seen so far
};

// Everything needed to resume a restart's dynamics deterministically. The
// batching schedule is data-index arithmetic, so no RNG state is required.
struct RestartState {
    NetworkParams params;
    ParamBuffers velocity;
    ParamMask mask;
    std::int64_t next_step = 0;
};

struct FitResult {
    NetworkParams best_params;           // feasible at the hard budget s
    double best_loss = 0.0;              // full-data loss of best_params
    std::vector<double> restart_losses;  // best feasible loss per restart
    std::vector<TracePoint> trace;       // monotone nonincreasing in best_loss
    std::vector<RestartState> states;    // resume points, one per restart
    TrainConfig resolved;                // cfg with decay/batch defaults filled
};

// Fits the drift regression by momentum gradient descent with periodic
// projection onto the sparsity/magnitude constraints. The first half of each
// restart runs at a relaxed budget of 4*s; projection events always score a
// hard-projected copy, so every logged candidate is feasible. Restart 0 is
// the zero network (a stationary point), which anchors the comparison with
// the empty model's loss. Deterministic given (data, cfg).
FitResult fit_least_squares(const RegressionSet& data, const Architecture& arch, std::int64_t s,
                            double F, const TrainConfig& cfg);

struct OptGapReport {
    double psi_hat = 0.0;            // max(0, fit_loss - floor_loss)
    double fit_loss = 0.0;           // loss the fit committed to
    double floor_loss = 0.0;         // best loss found with the extended budget
    std::int64_t extra_steps = 0;
};

// Estimates the optimization gap by resuming every restart for cfg.steps
// additional steps at the hard budget (a doubled total budget) and comparing
// the best loss found against the fit's committed loss. The fit's own best is
// carried into the floor, so the estimate is nonnegative by construction.
OptGapReport estimate_opt_gap(const FitResult& fit, const RegressionSet& data,
                              const TrainConfig& cfg);

}  // namespace driftnet
