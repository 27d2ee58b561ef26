#include "driftnet/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace driftnet {

namespace {

void require_regime(double n_delta, double delta) {
    if (!(delta > 0.0 && delta <= 1.0 && n_delta >= 2.0))
        throw std::invalid_argument(
            "sampling constraint violated, need delta <= 1 and n*delta >= 2");
}

double stage_exponent(const ClassParams& cls, int i) {
    const double bs = beta_star(cls.smooth, i);
    return 2.0 * bs / (2.0 * bs + static_cast<double>(cls.active[i]));
}

}  // namespace

double beta_star(const std::vector<double>& smooth, int i) {
    if (i < 0 || i >= static_cast<int>(smooth.size()))
        throw std::out_of_range("beta_star: stage index out of range");
    double b = smooth[i];
    for (std::size_t l = i + 1; l < smooth.size(); ++l) b *= std::min(smooth[l], 1.0);
    return b;
}

PhiResult phi_n(const ClassParams& cls, double n_delta) {
    cls.validate();
    if (!(n_delta >= 1.0)) throw std::invalid_argument("phi_n: need n*delta >= 1");
    PhiResult best;
    best.value = -1.0;
    for (int i = 0; i <= cls.q; ++i) {
        const double v = std::pow(n_delta, -stage_exponent(cls, i));
        if (v > best.value) {
            best.value = v;
            best.i_star = i;
        }
    }
    return best;
}

PhiResult phi_n(const RateParams& rate) {
    require_regime(rate.n_delta, rate.delta);
    return phi_n(rate.cls, rate.n_delta);
}

double rate_exponent(const ClassParams& cls) {
    cls.validate();
    double e = stage_exponent(cls, 0);
    for (int i = 1; i <= cls.q; ++i) e = std::min(e, stage_exponent(cls, i));
    return -e;
}

double c_l_lower(const ClassParams& cls) {
    cls.validate();
    double c = 0.0;
    for (int i = 0; i <= cls.q; ++i) {
        const double t = static_cast<double>(cls.active[i]);
        const double b = cls.smooth[i];
        c += ((b + t) / t) * std::log2(4.0 * std::max(t, b));
    }
    return c;
}

double covering_bound(double delta, int depth, int input_dim, std::int64_t s) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("covering_bound: radius must lie in (0, 1]");
    if (depth < 1) throw std::invalid_argument("covering_bound: depth must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("covering_bound: input dim must be >= 1");
    if (s < 2) throw std::invalid_argument("covering_bound: sparsity must be >= 2");
    const double L = static_cast<double>(depth);
    const double sd = static_cast<double>(s);
    const double log_inner = (2.0 * L + 6.0) * std::log(2.0) - std::log(delta) +
                             std::log(L + 1.0) + 2.0 * std::log(static_cast<double>(input_dim)) +
                             2.0 * L * std::log(sd);
    return (sd + 1.0) * log_inner;
}

double oracle_remainder(double F, std::int64_t s, int depth, double n_delta, double delta) {
    require_regime(n_delta, delta);
    if (!(F >= 1.0)) throw std::invalid_argument("oracle_remainder: need F >= 1");
    if (s < 2) throw std::invalid_argument("oracle_remainder: sparsity must be >= 2");
    if (depth < 1) throw std::invalid_argument("oracle_remainder: depth must be >= 1");
    const double L = static_cast<double>(depth);
    const double sd = static_cast<double>(s);
    const double ln_nd = std::log(n_delta);
    return F * F * (sd * (L * std::log(sd) + ln_nd) * ln_nd / n_delta + delta);
}

namespace {

struct Bounds {
    double depth_lo, depth_hi, width_lo, sparse_lo, sparse_hi;
};

Bounds selection_bounds(const RateParams& rate) {
    const PhiResult phi = phi_n(rate);
    const double nphi = rate.n_delta * phi.value;
    const double ln_nd = std::log(rate.n_delta);
    Bounds b;
    b.depth_lo = 11.0 * rate.cls.q + 8.0 + c_l_lower(rate.cls) * std::log2(nphi);
    b.depth_hi = rate.consts.c_depth_upper * nphi;
    b.width_lo = rate.consts.c_width * nphi;
    b.sparse_lo = rate.consts.c_sparse_lower * nphi * ln_nd;
    b.sparse_hi = rate.consts.c_sparse_upper * nphi * ln_nd;
    return b;
}

}  // namespace

ConditionReport check_conditions(const Architecture& arch, std::int64_t s, const RateParams& rate,
                                 double F, double holder_k) {
    arch.validate();
    const Bounds b = selection_bounds(rate);
    if (arch.input_dim() != rate.cls.input_dim())
        throw std::invalid_argument("check_conditions: architecture input dim does not match class");

    ConditionReport rep;
    const double f_needed = std::max(holder_k, 1.0);
    rep.conditions.push_back({"sup-bound", F >= f_needed, F - f_needed});

    const double L = static_cast<double>(arch.depth);
    const double depth_slack = std::min(L - b.depth_lo, b.depth_hi - L);
    rep.conditions.push_back({"depth", L >= b.depth_lo && L <= b.depth_hi, depth_slack});

    int min_width = arch.widths[1];
    for (int j = 1; j <= arch.depth; ++j) min_width = std::min(min_width, arch.widths[j]);
    rep.conditions.push_back(
        {"width", static_cast<double>(min_width) >= b.width_lo, min_width - b.width_lo});

    const double sd = static_cast<double>(s);
    const double sparse_slack = std::min(sd - b.sparse_lo, b.sparse_hi - sd);
    rep.conditions.push_back({"sparsity", sd >= b.sparse_lo && sd <= b.sparse_hi, sparse_slack});

    rep.all_ok = true;
    for (const auto& c : rep.conditions) rep.all_ok = rep.all_ok && c.ok;
    return rep;
}

SelectedNetwork select_architecture(const RateParams& rate, double F, double holder_k) {
    const Bounds b = selection_bounds(rate);
    const double f_needed = std::max(holder_k, 1.0);
    if (!(F >= f_needed))
        throw std::invalid_argument("select_architecture: sup bound F must be >= max(K, 1)");

    const double depth_lo = std::max(1.0, b.depth_lo);
    const int L = static_cast<int>(std::ceil(depth_lo));
    if (static_cast<double>(L) > b.depth_hi)
        throw std::runtime_error(
            "select_architecture: depth sandwich is empty (lower bound " + std::to_string(depth_lo) +
            " exceeds upper bound " + std::to_string(b.depth_hi) +
            "); increase c_depth_upper or the horizon n*delta");

    const int d = rate.cls.input_dim();
    const int width = std::max(static_cast<int>(std::ceil(b.width_lo)), d);

    const std::int64_t s = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(b.sparse_lo)), 2);
    if (static_cast<double>(s) > b.sparse_hi)
        throw std::runtime_error(
            "select_architecture: sparsity sandwich is empty (lower bound " +
            std::to_string(b.sparse_lo) + " exceeds upper bound " + std::to_string(b.sparse_hi) +
            "); increase c_sparse_upper");

    SelectedNetwork sel;
    sel.arch = make_architecture(d, L, width);
    sel.sparsity = s;
    return sel;
}

}  // namespace driftnet
