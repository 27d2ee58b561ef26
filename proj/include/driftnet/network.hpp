#pragma once
// Sparse bounded ReLU networks:
//   f(x) = W_L sigma_{v_L} W_{L-1} ... W_1 sigma_{v_1} W_0 x
// with sigma_v(y) = max(y - v, 0) componentwise, every weight/shift bounded
// by 1 in magnitude, a global budget s on the number of nonzero parameters,
// output hard-clamped to [-F, F], and the whole function zeroed off [0,1]^d.
//
// Weight W_j has shape p_{j+1} x p_j (rows act on the input vector); v_j sits
// in R^{p_j} and is applied before W_j for j = 1..L. There is no v_0.
//
// Storage is dense with an explicit active mask; sparsity is a constraint,
// not a layout. The batched engine evaluates forward/backward over batch
// lanes via the runtime-dispatched kernels.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "driftnet/rng.hpp"
#include "driftnet/sde.hpp"

namespace driftnet {

struct Architecture {
    int depth = 1;            // L, number of hidden layers
    std::vector<int> widths;  // p_0 .. p_{L+1}, p_{L+1} == 1

    int input_dim() const { return widths.empty() ? 0 : widths.front(); }
    int max_width() const;
    std::int64_t total_entries() const;  // weight cells + shift cells
    void validate() const;               // throws std::invalid_argument
    bool operator==(const Architecture&) const = default;
};

Architecture make_architecture(int input_dim, int depth, int hidden_width);

struct NetworkParams {
    Architecture arch;
    std::vector<std::vector<double>> weights;  // weights[j]: p_{j+1} x p_j row-major
    std::vector<std::vector<double>> shifts;   // shifts[j-1]: v_j in R^{p_j}
    std::int64_t sparsity_budget = 0;          // s
    double sup_bound = 1.0;                    // F
};

NetworkParams zero_network(const Architecture& arch, std::int64_t s, double F);

// Empty result means valid; otherwise one message per violated invariant.
std::vector<std::string> validate_params(const NetworkParams& params);
void require_valid(const NetworkParams& params);  // throws with all violations listed

// sigma_v(y): componentwise max(y_i - v_i, 0); throws on shape mismatch.
std::vector<double> shifted_relu(std::span<const double> v, std::span<const double> y);

// Validates, then evaluates with the cube indicator and the +-F clamp.
double forward(const NetworkParams& params, std::span<const double> x);
// Same evaluation without the validation pass (callers that have already
// validated and evaluate in a loop).
double forward_unchecked(const NetworkParams& params, std::span<const double> x);

std::int64_t count_nonzero(const NetworkParams& params);

// Clip every entry into [-clip, clip], then keep the s largest magnitudes
// (ties by canonical parameter order: W_0, v_1, W_1, ..., v_L, W_L, row-major
// inside each block; earlier wins) and zero the rest. A feasible input is
// returned unchanged. The result carries sparsity_budget = s.
NetworkParams project_params(const NetworkParams& params, std::int64_t s, double clip = 1.0);

enum class InitScheme { uniform_pm1_scaled, zeros_plus_sparse };
// Feasible (budget-s, magnitude <= 1) deterministic initialization.
// zeros_plus_sparse wires parallel input->output rails (ramp, constant,
// opposite-sign ramp) with unit-strength chain links, trainable at any depth;
// uniform_pm1_scaled is fan-scaled uniform noise thresholded to the budget.
// `core` is the budget the rails must survive when a caller later projects
// harder than s (trainers often train relaxed and project to a smaller
// budget); core < 0 means core = s.
NetworkParams init_params(const Architecture& arch, std::int64_t s, double F, InitScheme scheme,
                          std::uint64_t seed, std::int64_t core = -1);

// Parameter-shaped buffer (gradients, momentum, masks).
struct ParamBuffers {
    std::vector<std::vector<double>> weights, shifts;
    static ParamBuffers zeros_like(const Architecture& arch);
    void fill(double value);
};

struct ParamMask {
    std::vector<std::vector<std::uint8_t>> weights, shifts;
    static ParamMask none(const Architecture& arch);
    static ParamMask all(const Architecture& arch);
    static ParamMask support(const NetworkParams& params);  // nonzero entries
    std::int64_t count() const;
};

struct LsqGradient {
    ParamBuffers grads;
    double loss = 0.0;
};

// Mean-squared loss over a batch slice and its reverse-mode gradient over the
// masked (active) entries; inactive entries receive exact zeros. Samples off
// the cube or with the output clamp engaged contribute loss but no gradient
// (hard nonsmoothness convention; ReLU kinks use subgradient 0).
// The slice is rows [start, start+count) of `data`, wrapping modulo n.
LsqGradient grad_lsq(const NetworkParams& params, const RegressionSet& data, std::int64_t start,
                     std::int64_t count, const ParamMask* mask = nullptr);

// Reusable batched engine (workspace sized once; used by the trainer and the
// public wrappers).
class BatchEngine {
  public:
    BatchEngine(Architecture arch, int max_batch);

    // mean of (f(X)-Y)^2 over rows [start, start+count) mod n, chunked
    double loss(const NetworkParams& params, const RegressionSet& data, std::int64_t start,
                std::int64_t count);
    // single-chunk gradient (count <= max_batch); returns batch loss
    double gradient(const NetworkParams& params, const ParamMask& mask,
                    const RegressionSet& data, std::int64_t start, std::int64_t count,
                    ParamBuffers& out);

    const Architecture& arch() const { return arch_; }
    int max_batch() const { return max_batch_; }

  private:
    double run_chunk(const NetworkParams& params, const ParamMask* mask,
                     const RegressionSet& data, std::int64_t start, std::int64_t count,
                     ParamBuffers* out);

    Architecture arch_;
    int max_batch_;
    std::vector<std::vector<double>> act_;  // act_[0] input lanes, act_[j] hidden lanes
    std::vector<double> z_, da_, dz_;
    std::vector<double> raw_, y_, err_, gate_, cube_;
};

// Versioned binary dump (magic "DRFTNET1"), bit-exact round trip.
void write_network(const NetworkParams& params, const std::string& file);
NetworkParams read_network(const std::string& file);

}  // namespace driftnet
