#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftnet/composition.hpp"
#include "driftnet/network.hpp"

namespace driftnet {

// Constants steering the architecture-selection rules. The depth lower bound
// has no free constant; the other bounds scale as noted next to each field.
struct TheoryConstants {
    double c_depth_upper = 8.0;   // L <= c_depth_upper * (n*delta) * phi
    double c_width = 1.0;         // min width >= c_width * (n*delta) * phi
    double c_sparse_lower = 1.0;  // s >= c_sparse_lower * (n*delta) * phi * ln(n*delta)
    double c_sparse_upper = 4.0;  // s <= c_sparse_upper * (n*delta) * phi * ln(n*delta)
};

// Sampling-regime description a selection rule is evaluated at.
struct RateParams {
    ClassParams cls;
    double n_delta = 0.0;  // observation horizon n*delta
    double delta = 0.0;    // sampling interval
    TheoryConstants consts;
};

// Effective smoothness of stage i of a composition: beta_i multiplied by
// min(beta_l, 1) over all later stages l > i.
double beta_star(const std::vector<double>& smooth, int i);

struct PhiResult {
    double value = 0.0;
    int i_star = 0;  // maximizing stage; ties resolved toward the smallest index
};

// phi_n = max_i (n*delta)^(-2*beta_i^*/(2*beta_i^* + t_i)), requires n*delta >= 1.
PhiResult phi_n(const ClassParams& cls, double n_delta);

// Same, but under the sampling constraints delta <= 1 and n*delta >= 2.
PhiResult phi_n(const RateParams& rate);

// Signed convergence-rate exponent: risk ~ (n*delta)^rate_exponent. Equals
// -2*beta^*/(2*beta^* + t) evaluated at the stage that dominates phi_n.
double rate_exponent(const ClassParams& cls);

// Coefficient of the depth lower bound:
//   sum_i ((beta_i + t_i)/t_i) * log2(4*max(t_i, beta_i)).
double c_l_lower(const ClassParams& cls);

// Log covering number bound of the clipped sparse network class at radius
// delta in sup distance:
//   (s+1) * ln(2^(2L+6) * delta^(-1) * (L+1) * d^2 * s^(2L)),
// evaluated in log space. Requires delta in (0, 1], L >= 1, d >= 1, s >= 2.
double covering_bound(double delta, int depth, int input_dim, std::int64_t s);

// Estimation-error remainder attached to the oracle inequality:
//   F^2 * ( s * (L*ln(s) + ln(n*delta)) * ln(n*delta) / (n*delta) + delta ).
// Requires F >= 1, s >= 2, delta <= 1 and n*delta >= 2.
double oracle_remainder(double F, std::int64_t s, int depth, double n_delta, double delta);

struct Condition {
    std::string name;
    bool ok = false;
    double slack = 0.0;  // >= 0 iff satisfied; distance to the bound
};

struct ConditionReport {
    std::vector<Condition> conditions;  // sup-bound, depth, width, sparsity
    bool all_ok = false;
};

// Checks the four side conditions the risk bound needs: F >= max(K, 1); the
// depth sandwich; the minimum-width lower bound; the sparsity sandwich.
ConditionReport check_conditions(const Architecture& arch, std::int64_t s, const RateParams& rate,
                                 double F, double holder_k);

struct SelectedNetwork {
    Architecture arch;
    std::int64_t sparsity = 0;
};

// Picks the smallest depth admitted by the depth condition, the smallest
// admissible uniform hidden width (at least the input dimension), and the
// smallest admissible sparsity budget (at least 2). Throws when the sandwich
// conditions admit no choice.
SelectedNetwork select_architecture(const RateParams& rate, double F, double holder_k);

}  // namespace driftnet
