#pragma once
// Ground-truth drift components: compositions of coordinate-sparse smooth
// maps f = g_q o ... o g_0, evaluated on [0,1]^d and zero-extended off the
// cube. Recipes below generate class members; a numeric Hoelder-constant
// estimator provides lower bounds for membership checks.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftnet {

class ClassViolationError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// (q, d-vector, t-vector, beta-vector, K)
struct ClassParams {
    int q = 0;
    std::vector<int> dims;       // d_0 .. d_{q+1}, d_{q+1} = 1
    std::vector<int> active;     // t_0 .. t_q, t_i <= d_i
    std::vector<double> smooth;  // beta_0 .. beta_q, > 0
    double holder_k = 1.0;       // K

    int input_dim() const { return dims.empty() ? 0 : dims.front(); }
    void validate() const;  // throws ClassViolationError
};

struct ComponentFn {
    std::vector<int> coords;  // 0-based indices into the layer input, size <= t_i
    std::function<double(std::span<const double>)> fn;  // applied to the gathered coords
};

struct CompositionLayer {
    std::vector<ComponentFn> comps;  // one per output coordinate, size d_{i+1}
    double lo = 0.0, hi = 0.0;       // probed output range
};

struct CompositionSpec {
    ClassParams params;
    std::vector<CompositionLayer> layers;  // size q+1

    // Zero off [0,1]^d (closed cube), the composition chain inside.
    double eval(std::span<const double> x) const;
    // The raw chain without the cube indicator (used by validators).
    double eval_inside(std::span<const double> x) const;
};

enum class Recipe { additive, product_of_splines, single_layer_polynomial, custom_closure };
Recipe recipe_from_name(const std::string& name);  // throws on unknown name
std::string recipe_name(Recipe r);

struct RecipeOptions {
    // single_layer_polynomial: explicit coefficients a_0..a_deg for
    // sum a_k x^k in the first coordinate; empty means seeded coefficients.
    std::vector<double> poly_coeffs;
    // custom_closure layers
    std::vector<CompositionLayer> custom_layers;
};

CompositionSpec build_composition(const ClassParams& params, Recipe recipe, std::uint64_t seed,
                                  const RecipeOptions& opts = {});

// Quintic smoothstep: 0 for v <= 0, 1 for v >= 1, 6v^5-15v^4+10v^3 between
// (C^2, max slope 15/8). Shared by recipes and the radial cutoff.
double quintic_smoothstep(double v);

struct HolderEstimate {
    double value = 0.0;
    bool unbounded = false;
};

// Probe-max lower bound for the Hoelder-ball constant of g on [lo,hi]^arity:
// sum of sup|D^a g| over multi-index orders < beta plus the worst difference
// quotient of the order-q derivatives, where at integer beta the quotient
// acts on order beta-1 with exponent 1 (documented convention; the literal
// exponent beta-floor(beta)=0 is degenerate). Derivatives are nested central
// differences with step 1e-4. The lattice is dyadic with 2^level+1 points per
// axis, so estimates are monotone nondecreasing in level.
HolderEstimate holder_constant_estimate(
    const std::function<double(std::span<const double>)>& g, double beta, int arity, double lo,
    double hi, int level = 7);

}  // namespace driftnet
