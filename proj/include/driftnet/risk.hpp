#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "driftnet/composition.hpp"
#include "driftnet/network.hpp"
#include "driftnet/sde.hpp"

namespace driftnet {

// Scalar ground-truth drift component b_i evaluated at a state.
using DriftTruth = std::function<double(std::span<const double>)>;

struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t count = 0;  // copies (generalization) or batches (ergodic)
};

// In-sample risk: (1/n) sum_k (fhat(X_k) - b_i(X_k))^2 over the design points.
double empirical_risk(const NetworkParams& fhat, const DriftTruth& truth,
                      const RegressionSet& data);

// Out-of-sample risk: the same average over `copies` independent paths drawn
// from the model (paths identical to simulate_copies with the same seed).
// Returns the mean across copies with its standard error; copies >= 2.
RiskEstimate generalization_risk(const NetworkParams& fhat, const DriftTruth& truth,
                                 const SdeModel& model, std::int64_t n, double delta, int substeps,
                                 std::int64_t copies, std::uint64_t seed,
                                 const X0Sampler* x0_sampler = nullptr);

// L2(Pi) risk against the stationary law: one long trajectory, the first
// burn_in observations dropped, (fhat - b_i)^2 averaged over `horizon`
// samples. burn_in == 0 picks max(horizon/10, 100). The standard error comes
// from batch means, which tolerates the serial correlation of the chain.
RiskEstimate l2_pi_risk(const NetworkParams& fhat, const DriftTruth& truth, const SdeModel& model,
                        std::int64_t burn_in, std::int64_t horizon, double delta, int substeps,
                        std::uint64_t seed);

struct SweepCell {
    std::int64_t n = 0;
    double delta = 0.0;
    double mean_risk = 0.0;  // risk averaged over seeds for this (n, delta)
};

struct SweepSummary {
    double slope = 0.0;      // OLS slope of ln(risk) on ln(n*delta)
    double intercept = 0.0;
    bool slope_defined = false;  // needs >= 3 cells with positive risk
    double theory_exponent = 0.0;
    int points_used = 0;
    std::vector<int> excluded_cells;  // indices whose risk was not positive
};

// Fits the empirical convergence rate across a grid of sampling regimes and
// reports it next to the theoretical exponent -2*beta^*/(2*beta^* + t^*).
// The grid must hold at least 3 cells, each with delta <= 1 and n*delta >= 2,
// n*delta strictly increasing and n*delta^2 strictly decreasing.
SweepSummary rate_sweep(const std::vector<SweepCell>& cells, const ClassParams& cls);

}  // namespace driftnet
