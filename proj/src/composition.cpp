#include "driftnet/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftnet/rng.hpp"

namespace driftnet {

void ClassParams::validate() const {
    if (q < 0) throw ClassViolationError("class violation: q must be >= 0");
    if (static_cast<int>(dims.size()) != q + 2)
        throw ClassViolationError("class violation: dims must have q+2 entries");
    if (static_cast<int>(active.size()) != q + 1)
        throw ClassViolationError("class violation: active must have q+1 entries");
    if (static_cast<int>(smooth.size()) != q + 1)
        throw ClassViolationError("class violation: smooth must have q+1 entries");
    if (dims.back() != 1) throw ClassViolationError("class violation: d_{q+1} must be 1");
    for (int d : dims)
        if (d < 1) throw ClassViolationError("class violation: dims must be >= 1");
    for (int i = 0; i <= q; ++i) {
        if (active[i] < 1) throw ClassViolationError("class violation: t_i must be >= 1");
        if (active[i] > dims[i])
            throw ClassViolationError("class violation: t_" + std::to_string(i) + " = " +
                                      std::to_string(active[i]) + " exceeds d_" +
                                      std::to_string(i) + " = " + std::to_string(dims[i]));
    }
    for (double b : smooth)
        if (!(b > 0.0)) throw ClassViolationError("class violation: beta_i must be > 0");
    if (!(holder_k > 0.0)) throw ClassViolationError("class violation: K must be > 0");
}

double quintic_smoothstep(double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    return ((6.0 * v - 15.0) * v + 10.0) * v * v * v;
}

namespace {

constexpr int kMaxDim = 64;

double eval_chain(const CompositionSpec& spec, std::span<const double> x) {
    double bufa[kMaxDim], bufb[kMaxDim], gathered[kMaxDim];
    std::copy(x.begin(), x.end(), bufa);
    double* cur = bufa;
    double* nxt = bufb;
    for (const CompositionLayer& layer : spec.layers) {
        for (std::size_t j = 0; j < layer.comps.size(); ++j) {
            const ComponentFn& c = layer.comps[j];
            for (std::size_t a = 0; a < c.coords.size(); ++a) gathered[a] = cur[c.coords[a]];
            nxt[j] = c.fn(std::span<const double>(gathered, c.coords.size()));
        }
        std::swap(cur, nxt);
    }
    return cur[0];
}

}  // namespace

double CompositionSpec::eval_inside(std::span<const double> x) const { return eval_chain(*this, x); }

double CompositionSpec::eval(std::span<const double> x) const {
    for (double c : x)
        if (!(c >= 0.0 && c <= 1.0)) return 0.0;
    return eval_chain(*this, x);
}

Recipe recipe_from_name(const std::string& name) {
    if (name == "additive") return Recipe::additive;
    if (name == "product-of-splines") return Recipe::product_of_splines;
    if (name == "single-layer-polynomial") return Recipe::single_layer_polynomial;
    if (name == "custom-closure") return Recipe::custom_closure;
    throw std::invalid_argument("unknown composition recipe '" + name + "'");
}

std::string recipe_name(Recipe r) {
    switch (r) {
        case Recipe::additive: return "additive";
        case Recipe::product_of_splines: return "product-of-splines";
        case Recipe::single_layer_polynomial: return "single-layer-polynomial";
        case Recipe::custom_closure: return "custom-closure";
    }
    return "?";
}

namespace {

// Probe each layer over a lattice of its input box to record output ranges.
void fill_ranges(CompositionSpec& spec) {
    double lo = 0.0, hi = 1.0;  // layer 0 consumes the unit cube
    for (CompositionLayer& layer : spec.layers) {
        double out_lo = std::numeric_limits<double>::infinity();
        double out_hi = -out_lo;
        const int pts = 33;
        // probe componentwise: every component reads <= a few coords, so a
        // per-coordinate lattice is enough (components are evaluated on the
        // gathered coordinates only).
        for (const ComponentFn& c : layer.comps) {
            const int arity = static_cast<int>(c.coords.size());
            std::vector<int> idx(arity, 0);
            std::vector<double> args(arity);
            for (;;) {
                for (int a = 0; a < arity; ++a)
                    args[a] = lo + (hi - lo) * idx[a] / (pts - 1);
                const double v = c.fn(std::span<const double>(args.data(), args.size()));
                out_lo = std::min(out_lo, v);
                out_hi = std::max(out_hi, v);
                int a = 0;
                for (; a < arity; ++a) {
                    if (++idx[a] < pts) break;
                    idx[a] = 0;
                }
                if (a == arity) break;
            }
        }
        layer.lo = out_lo;
        layer.hi = out_hi;
        lo = out_lo;
        hi = out_hi;
    }
}

void check_structure(const CompositionSpec& spec) {
    const ClassParams& p = spec.params;
    if (static_cast<int>(spec.layers.size()) != p.q + 1)
        throw ClassViolationError("class violation: layer count != q+1");
    for (int i = 0; i <= p.q; ++i) {
        const CompositionLayer& layer = spec.layers[i];
        if (static_cast<int>(layer.comps.size()) != p.dims[i + 1])
            throw ClassViolationError("class violation: layer " + std::to_string(i) +
                                      " must have d_" + std::to_string(i + 1) + " components");
        for (const ComponentFn& c : layer.comps) {
            if (static_cast<int>(c.coords.size()) > p.active[i])
                throw ClassViolationError("class violation: component in layer " +
                                          std::to_string(i) + " reads more than t_" +
                                          std::to_string(i) + " coordinates");
            for (int ix : c.coords)
                if (ix < 0 || ix >= p.dims[i])
                    throw ClassViolationError("class violation: coordinate index out of range");
            if (!c.fn) throw ClassViolationError("class violation: missing component closure");
        }
    }
}

}  // namespace

CompositionSpec build_composition(const ClassParams& params, Recipe recipe, std::uint64_t seed,
                                  const RecipeOptions& opts) {
    params.validate();
    for (int d : params.dims)
        if (d > kMaxDim)
            throw ClassViolationError("class violation: layer dimension too large for this build");

    CompositionSpec spec;
    spec.params = params;
    Rng rng(seed);

    switch (recipe) {
        case Recipe::single_layer_polynomial: {
            if (params.q != 0)
                throw ClassViolationError("single-layer-polynomial requires q = 0");
            std::vector<double> coeffs = opts.poly_coeffs;
            if (coeffs.empty()) {
                const int deg = std::max(1, static_cast<int>(std::ceil(params.smooth[0])));
                coeffs.resize(deg + 1);
                double mass = 0.0;
                for (double& c : coeffs) {
                    c = rng.uniform(-1.0, 1.0);
                    mass += std::abs(c);
                }
                // keep sup over [0,1] comfortably below K
                const double cap = 0.9 * std::min(params.holder_k, 1.0);
                if (mass > 0.0)
                    for (double& c : coeffs) c *= cap / mass;
            }
            CompositionLayer layer;
            ComponentFn comp;
            comp.coords = {0};
            comp.fn = [coeffs](std::span<const double> u) {
                double acc = 0.0;
                for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u[0] + coeffs[k];
                return acc;
            };
            layer.comps.push_back(std::move(comp));
            spec.layers.push_back(std::move(layer));
            break;
        }
        case Recipe::additive: {
            // canonical additive member: f(x) = sum_j x_j^2 / 2
            if (params.q != 1 || params.dims[1] != params.dims[0])
                throw ClassViolationError("additive recipe requires q = 1 and d_1 = d_0");
            if (params.active[1] != params.dims[1])
                throw ClassViolationError("additive recipe requires t_1 = d_1 (full sum)");
            CompositionLayer inner;
            for (int j = 0; j < params.dims[0]; ++j) {
                ComponentFn comp;
                comp.coords = {j};
                comp.fn = [](std::span<const double> u) { return 0.5 * u[0] * u[0]; };
                inner.comps.push_back(std::move(comp));
            }
            CompositionLayer outer;
            ComponentFn sum;
            sum.coords.resize(params.dims[1]);
            for (int j = 0; j < params.dims[1]; ++j) sum.coords[j] = j;
            sum.fn = [](std::span<const double> u) {
                double acc = 0.0;
                for (double v : u) acc += v;
                return acc;
            };
            outer.comps.push_back(std::move(sum));
            spec.layers.push_back(std::move(inner));
            spec.layers.push_back(std::move(outer));
            break;
        }
        case Recipe::product_of_splines: {
            if (params.q != 1 || params.dims[1] != params.dims[0])
                throw ClassViolationError("product-of-splines requires q = 1 and d_1 = d_0");
            if (params.active[1] != params.dims[1])
                throw ClassViolationError("product-of-splines requires t_1 = d_1 (full product)");
            CompositionLayer inner;
            for (int j = 0; j < params.dims[0]; ++j) {
                const double gamma = rng.uniform(0.2, 0.6);
                const double shift = rng.uniform(0.0, 0.4);
                ComponentFn comp;
                comp.coords = {j};
                comp.fn = [gamma, shift](std::span<const double> u) {
                    return 1.0 + gamma * (quintic_smoothstep(u[0] - shift) - 0.5);
                };
                inner.comps.push_back(std::move(comp));
            }
            CompositionLayer outer;
            ComponentFn prod;
            prod.coords.resize(params.dims[1]);
            for (int j = 0; j < params.dims[1]; ++j) prod.coords[j] = j;
            prod.fn = [](std::span<const double> u) {
                double acc = 1.0;
                for (double v : u) acc *= v;
                return acc;
            };
            outer.comps.push_back(std::move(prod));
            spec.layers.push_back(std::move(inner));
            spec.layers.push_back(std::move(outer));
            break;
        }
        case Recipe::custom_closure: {
            if (opts.custom_layers.empty())
                throw std::invalid_argument("custom-closure recipe requires layers");
            spec.layers = opts.custom_layers;
            break;
        }
    }

    check_structure(spec);
    fill_ranges(spec);
    return spec;
}

namespace {

constexpr double kFdStep = 1e-4;

// Nested central differences for the mixed partial D^alpha g at x.
double fd_derivative(const std::function<double(std::span<const double>)>& g,
                     std::vector<int>& alpha, std::vector<double>& x) {
    int axis = -1;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] > 0) {
            axis = static_cast<int>(i);
            break;
        }
    if (axis < 0) return g(std::span<const double>(x.data(), x.size()));
    alpha[axis]--;
    x[axis] += kFdStep;
    const double hiv = fd_derivative(g, alpha, x);
    x[axis] -= 2.0 * kFdStep;
    const double lov = fd_derivative(g, alpha, x);
    x[axis] += kFdStep;
    alpha[axis]++;
    return (hiv - lov) / (2.0 * kFdStep);
}

void enumerate_orders(int arity, int order, std::vector<int>& cur, int axis,
                      std::vector<std::vector<int>>& out) {
    if (axis == arity - 1) {
        cur[axis] = order;
        out.push_back(cur);
        return;
    }
    for (int k = 0; k <= order; ++k) {
        cur[axis] = k;
        enumerate_orders(arity, order - k, cur, axis + 1, out);
    }
}

std::vector<std::vector<int>> multi_indices(int arity, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(arity, 0);
    enumerate_orders(arity, order, cur, 0, out);
    return out;
}

}  // namespace

HolderEstimate holder_constant_estimate(
    const std::function<double(std::span<const double>)>& g, double beta, int arity, double lo,
    double hi, int level) {
    if (!(beta > 0.0)) throw std::invalid_argument("holder_constant_estimate: beta must be > 0");
    if (arity < 1 || arity > 3)
        throw std::invalid_argument("holder_constant_estimate: arity must be in 1..3");
    if (!(hi > lo)) throw std::invalid_argument("holder_constant_estimate: empty domain");
    if (level < 1) level = 1;

    const int fl = static_cast<int>(std::floor(beta));
    const bool integer_beta = (beta == std::floor(beta));
    // smoothness sum over |alpha| < beta; quotient on order fl (or fl-1 at
    // integer beta) with exponent beta - fl (or 1).
    const int max_sup_order = integer_beta ? fl - 1 : fl;
    const int quot_order = integer_beta ? fl - 1 : fl;
    const double quot_exp = integer_beta ? 1.0 : beta - fl;

    // dyadic lattice, capped so the pair loop stays desk-scale
    int per_axis = (1 << level) + 1;
    while (std::pow(static_cast<double>(per_axis), arity) > 4200.0 && per_axis > 5)
        per_axis = (per_axis - 1) / 2 + 1;
    std::vector<std::vector<double>> pts;
    {
        std::vector<int> idx(arity, 0);
        for (;;) {
            std::vector<double> p(arity);
            for (int a = 0; a < arity; ++a) p[a] = lo + (hi - lo) * idx[a] / (per_axis - 1);
            pts.push_back(std::move(p));
            int a = 0;
            for (; a < arity; ++a) {
                if (++idx[a] < per_axis) break;
                idx[a] = 0;
            }
            if (a == arity) break;
        }
    }

    HolderEstimate est;
    std::vector<double> xbuf(arity);

    for (int order = 0; order <= max_sup_order; ++order) {
        for (auto& alpha : multi_indices(arity, order)) {
            double worst = 0.0;
            for (const auto& p : pts) {
                xbuf = p;
                const double v = fd_derivative(g, alpha, xbuf);
                if (!std::isfinite(v)) {
                    est.unbounded = true;
                    est.value = std::numeric_limits<double>::infinity();
                    return est;
                }
                worst = std::max(worst, std::abs(v));
            }
            est.value += worst;
        }
    }

    if (quot_order >= 0) {
        for (auto& alpha : multi_indices(arity, quot_order)) {
            // derivative values at all lattice points, then worst pair quotient
            std::vector<double> dv(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) {
                xbuf = pts[i];
                dv[i] = fd_derivative(g, alpha, xbuf);
                if (!std::isfinite(dv[i])) {
                    est.unbounded = true;
                    est.value = std::numeric_limits<double>::infinity();
                    return est;
                }
            }
            double worst = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    double dist = 0.0;
                    for (int a = 0; a < arity; ++a)
                        dist = std::max(dist, std::abs(pts[i][a] - pts[j][a]));
                    if (dist <= 0.0) continue;
                    worst = std::max(worst,
                                     std::abs(dv[i] - dv[j]) / std::pow(dist, quot_exp));
                }
            }
            est.value += worst;
        }
    }
    return est;
}

}  // namespace driftnet
