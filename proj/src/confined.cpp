#include "driftnet/confined.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "driftnet/rng.hpp"

namespace driftnet {

double ConfinedDrift::cutoff(double u) const {
    return quintic_smoothstep((u - dim) / dim);
}

void ConfinedDrift::drift(const double* x, double* out) const {
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) norm2 += x[i] * x[i];
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
    out[coord - 1] = inner(std::span<const double>(x, dim));
    if (norm2 > 0.0) {
        const double norm = std::sqrt(norm2);
        const double pull = radial_rate * cutoff(norm) / norm;
        for (int i = 0; i < dim; ++i) out[i] -= pull * x[i];
    }
}

SdeModel ConfinedDrift::as_model(double sigma) const {
    SdeModel model;
    model.dim = dim;
    ConfinedDrift self = *this;
    model.drift = [self](const double* x, double* out) { self.drift(x, out); };
    const int d = dim;
    model.diffusion = [sigma, d](const double*, double* out) {
        for (int i = 0; i < d * d; ++i) out[i] = 0.0;
        for (int i = 0; i < d; ++i) out[i * d + i] = sigma;
    };
    model.diffusion_kind = sigma == 0.0 ? DiffusionKind::zero : DiffusionKind::scaled_identity;
    model.iso_scale = sigma;
    return model;
}

ConfinedDrift confine_drift(std::function<double(std::span<const double>)> f, int dim, int coord,
                            double r) {
    if (dim < 1) throw std::invalid_argument("confine_drift: dim must be >= 1");
    if (coord < 1 || coord > dim) throw std::invalid_argument("confine_drift: coord out of range");
    if (!(r > 0.0) || r > 1.0) throw std::invalid_argument("confine_drift: need 0 < r <= 1");
    if (!f) throw std::invalid_argument("confine_drift: missing inner function");
    ConfinedDrift b;
    b.dim = dim;
    b.coord = coord;
    b.radial_rate = r;
    b.inner = std::move(f);
    return b;
}

ConfinedDrift confine_drift(const CompositionSpec& f, int coord, double r) {
    CompositionSpec copy = f;
    const int dim = f.params.input_dim();
    return confine_drift(
        [copy = std::move(copy)](std::span<const double> x) { return copy.eval(x); }, dim, coord,
        r);
}

namespace {

constexpr double kTol = 1e-9;

// stratified radii in (r_lo, r_hi] paired with random directions
void shell_point(Rng& rng, int dim, double r_lo, double r_hi, int k, int count,
                 std::vector<double>& out) {
    const double u = (k + rng.uniform()) / count;
    const double radius = r_lo + u * (r_hi - r_lo);
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        out[i] = rng.normal();
        norm2 += out[i] * out[i];
    }
    if (norm2 == 0.0) {
        out[0] = 1.0;
        norm2 = 1.0;
    }
    const double scale = radius / std::sqrt(norm2);
    for (int i = 0; i < dim; ++i) out[i] *= scale;
}

}  // namespace

B0Report validate_b0(const std::function<void(const double*, double*)>& drift, int dim, double r,
                     double K, const ProbeSpec& probe) {
    B0Report rep;
    Rng rng(probe.seed);
    std::vector<double> x(dim), b(dim);
    const double r_max = probe.max_radius_factor * dim;

    double radial_margin = -std::numeric_limits<double>::infinity();
    double sup_margin = -std::numeric_limits<double>::infinity();
    int used = 0;

    // shell (2d, r_max]: both conditions
    for (int k = 0; k < probe.points; ++k) {
        shell_point(rng, dim, 2.0 * dim, r_max, k, probe.points, x);
        drift(x.data(), b.data());
        double dot = 0.0, norm2 = 0.0, binf = 0.0;
        for (int i = 0; i < dim; ++i) {
            dot += b[i] * x[i];
            norm2 += x[i] * x[i];
            binf = std::max(binf, std::abs(b[i]));
        }
        radial_margin = std::max(radial_margin, dot + r * std::sqrt(norm2));
        sup_margin = std::max(sup_margin, binf - K);
        ++used;
    }
    // inner region (0, 2d] plus the unit cube: sup condition only
    for (int k = 0; k < probe.points; ++k) {
        if (k % 2 == 0) {
            shell_point(rng, dim, 0.0, 2.0 * dim, k / 2, (probe.points + 1) / 2, x);
        } else {
            for (int i = 0; i < dim; ++i) x[i] = rng.uniform();
        }
        drift(x.data(), b.data());
        double binf = 0.0;
        for (int i = 0; i < dim; ++i) binf = std::max(binf, std::abs(b[i]));
        sup_margin = std::max(sup_margin, binf - K);
        ++used;
    }

    rep.radial_margin = radial_margin;
    rep.sup_margin = sup_margin;
    rep.radial_pass = radial_margin <= kTol;
    rep.sup_pass = sup_margin <= kTol;
    rep.pass = rep.radial_pass && rep.sup_pass;
    rep.points = used;
    return rep;
}

ErgodicityReport validate_ergodicity(const SdeModel& model, double r, double alpha,
                                     double lambda_minus, double lambda_plus, double m0,
                                     const ProbeSpec& probe) {
    const int dim = model.dim;
    ErgodicityReport rep;
    rep.m0 = m0 > 0.0 ? m0 : 2.0 * dim;
    Rng rng(probe.seed);
    std::vector<double> x(dim), b(dim), sig(static_cast<std::size_t>(dim) * dim);
    const double r_max = std::max(probe.max_radius_factor * dim, rep.m0 * 2.0);

    double radial_margin = -std::numeric_limits<double>::infinity();
    double lower_margin = -std::numeric_limits<double>::infinity();
    double upper_margin = -std::numeric_limits<double>::infinity();

    for (int k = 0; k < probe.points; ++k) {
        shell_point(rng, dim, rep.m0, r_max, k, probe.points, x);
        model.drift(x.data(), b.data());
        double dot = 0.0, norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            dot += b[i] * x[i];
            norm2 += x[i] * x[i];
        }
        const double norm = std::sqrt(norm2);
        radial_margin = std::max(radial_margin, dot + r * std::pow(norm, alpha));

        if (model.diffusion) {
            model.diffusion(x.data(), sig.data());
            // |Sigma(x)^T x|^2
            double st2 = 0.0;
            for (int c = 0; c < dim; ++c) {
                double col = 0.0;
                for (int i = 0; i < dim; ++i) col += sig[i * dim + c] * x[i];
                st2 += col * col;
            }
            lower_margin = std::max(lower_margin, lambda_minus * norm2 - st2);
            upper_margin = std::max(upper_margin, st2 - lambda_plus * norm2);
        } else {
            lower_margin = std::max(lower_margin, lambda_minus * norm2);
            upper_margin = std::max(upper_margin, 0.0);
        }
    }

    rep.radial_margin = radial_margin;
    rep.lower_margin = lower_margin;
    rep.upper_margin = upper_margin;
    rep.radial_pass = radial_margin <= kTol;
    rep.diffusion_pass = lower_margin <= kTol && upper_margin <= kTol;
    rep.pass = rep.radial_pass && rep.diffusion_pass;
    rep.points = probe.points;
    return rep;
}

}  // namespace driftnet
