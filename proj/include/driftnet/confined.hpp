#pragma once
// Confinement of a cube-supported scalar function into an ergodic drift:
//   b(x) = f(x) e_i - r * (x/|x|) * psi(|x|),   b(0) = f(0) e_i
// with psi a smoothstep that vanishes on |x| <= d and equals 1 on |x| >= 2d.
// Every cube point has |x| <= sqrt(d) <= d, so b^i equals f on [0,1]^d, while
// outside radius 2d the drift is a pure inward pull of rate r. Numeric
// validators check the resulting class membership and the ergodicity
// conditions on probe grids.

#include <cstdint>
#include <functional>
#include <span>

#include "driftnet/composition.hpp"
#include "driftnet/sde.hpp"

namespace driftnet {

struct ConfinedDrift {
    int dim = 1;
    int coord = 1;  // 1-based component carrying f
    double radial_rate = 1.0;
    std::function<double(std::span<const double>)> inner;  // cube-supported f

    // psi(u) for this dimension: smoothstep((u - d)/d); Lipschitz constant
    // 15/(8d).
    double cutoff(double u) const;
    void drift(const double* x, double* out) const;

    // SdeModel with this drift and Sigma = sigma * I.
    SdeModel as_model(double sigma) const;
};

ConfinedDrift confine_drift(const CompositionSpec& f, int coord, double r);
ConfinedDrift confine_drift(std::function<double(std::span<const double>)> f, int dim, int coord,
                            double r);

struct ProbeSpec {
    int points = 2048;          // >= 1e3 per the class definition checks
    double max_radius_factor = 10.0;  // probe radii up to factor * d
    std::uint64_t seed = 0x9D5EEDULL;
};

// Membership report for the bounded inward-drift class: radial condition
// <b(x),x> <= -r|x| for |x| > 2d, and sup|b|_inf <= K. Margins are the worst
// observed violation (<= 0 means satisfied); pass uses tolerance 1e-9.
struct B0Report {
    bool pass = false;
    bool radial_pass = false;
    bool sup_pass = false;
    double radial_margin = 0.0;  // max <b,x> + r|x|
    double sup_margin = 0.0;     // max |b|_inf - K
    int points = 0;
};
B0Report validate_b0(const std::function<void(const double*, double*)>& drift, int dim, double r,
                     double K, const ProbeSpec& probe = {});

// Ergodicity conditions: (i) <b(x),x> <= -r|x|^alpha for |x| > M_0 and
// (ii) lambda_minus |x|^2 <= |Sigma(x)^T x|^2 <= lambda_plus |x|^2.
struct ErgodicityReport {
    bool pass = false;
    bool radial_pass = false;    // condition (i)
    bool diffusion_pass = false; // condition (ii)
    double radial_margin = 0.0;
    double lower_margin = 0.0;  // max lambda_minus |x|^2 - |S^T x|^2
    double upper_margin = 0.0;  // max |S^T x|^2 - lambda_plus |x|^2
    double m0 = 0.0;
    int points = 0;
};
ErgodicityReport validate_ergodicity(const SdeModel& model, double r, double alpha,
                                     double lambda_minus, double lambda_plus,
                                     double m0 = 0.0,  // 0 => default 2*dim
                                     const ProbeSpec& probe = {});

}  // namespace driftnet
