#pragma once
// Diffusion simulation and the drift-regression dataset.
//
// The process dX_t = b(X_t) dt + S(X_t) dw_t is integrated with Euler-Maruyama
// at micro-step h = delta/substeps; every `substeps` micro-steps one row is
// emitted, giving n+1 observations at spacing delta. Regression targets are
// the scaled forward differences Y_k = (X^i_{k+1} - X^i_k)/delta, which
// concentrate on the i-th drift component.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftnet/rng.hpp"

namespace driftnet {

// Structure tag for the diffusion matrix; scaled_identity covers every model
// this artifact ships (S = sigma * I) and avoids a d*d closure call per
// micro-step. `general` falls back to the closure.
enum class DiffusionKind { zero, scaled_identity, general };

struct SdeModel {
    int dim = 1;
    // writes b(x) into out[0..dim)
    std::function<void(const double* x, double* out)> drift;
    // writes S(x) into out[0..dim*dim) row-major
    std::function<void(const double* x, double* out)> diffusion;
    DiffusionKind diffusion_kind = DiffusionKind::general;
    double iso_scale = 0.0;  // sigma when diffusion_kind == scaled_identity

    // optional metadata used by validators/tests, not by the integrator
    std::optional<double> drift_lipschitz_hint;
    std::optional<double> drift_sup_hint;
};

struct ObservedPath {
    int dim = 0;
    std::int64_t n = 0;  // number of observation intervals; obs holds n+1 rows
    double delta = 0.0;
    std::uint64_t seed = 0;
    int substeps = 1;
    std::vector<double> obs;  // (n+1) x dim, row-major

    std::span<const double> row(std::int64_t k) const {
        return {obs.data() + k * dim, static_cast<std::size_t>(dim)};
    }
};

struct RegressionSet {
    int coord = 1;  // 1-based component index i
    int dim = 0;
    std::int64_t n = 0;
    double delta = 0.0;
    std::vector<double> inputs;   // n x dim, row-major (X_{k delta})
    std::vector<double> targets;  // length n (Y_{k delta})

    std::span<const double> input_row(std::int64_t k) const {
        return {inputs.data() + k * dim, static_cast<std::size_t>(dim)};
    }
};

class SimulationError : public std::runtime_error {
  public:
    SimulationError(const std::string& msg, std::int64_t obs_index, int micro_index)
        : std::runtime_error(msg), obs_index(obs_index), micro_index(micro_index) {}
    std::int64_t obs_index;
    int micro_index;
};

ObservedPath simulate_path(const SdeModel& model, std::span<const double> x0, std::int64_t n,
                           double delta, int substeps, std::uint64_t seed);

RegressionSet make_regression_set(const ObservedPath& path, int coord);

using X0Sampler = std::function<std::vector<double>(Rng&)>;
X0Sampler point_mass_at_zero(int dim);
X0Sampler point_mass(std::vector<double> x0);

// Independent copies. Path j uses seed derive_seed(seed, j); its x0 comes from
// the sampler driven by a further-derived stream, so sampler draws never
// collide with integrator noise.
std::vector<ObservedPath> simulate_copies(const SdeModel& model, const X0Sampler& x0_sampler,
                                          std::int64_t n, double delta, int substeps,
                                          std::int64_t count, std::uint64_t seed);
// Streaming form (one path in memory at a time); the paths visited are
// identical to simulate_copies.
void for_each_copy(const SdeModel& model, const X0Sampler& x0_sampler, std::int64_t n,
                   double delta, int substeps, std::int64_t count, std::uint64_t seed,
                   const std::function<void(std::int64_t j, const ObservedPath&)>& visit);

struct OuMoments {
    double mean;
    double variance;
};
// Exact Ornstein-Uhlenbeck transition moments for dX = -theta X dt + sigma dw.
OuMoments ou_reference_moments(double theta, double sigma, double x0, double t);

SdeModel make_ou_model(double theta, double sigma, int dim = 1);

// Probe-based check of the model invariants (finite outputs; if a Lipschitz
// hint is present, sampled difference quotients must not exceed it by more
// than a 1e-6 relative margin).
struct ModelProbeReport {
    bool finite_ok = true;
    bool lipschitz_ok = true;
    double worst_quotient = 0.0;
};
ModelProbeReport probe_model(const SdeModel& model, double radius, int points,
                             std::uint64_t seed);

// Binary path dump, little-endian f64, magic "DRFTPATH1";
// header (dim, n, delta, seed, substeps) then row-major observations.
void write_path(const ObservedPath& path, const std::string& file);
ObservedPath read_path(const std::string& file);

}  // namespace driftnet
