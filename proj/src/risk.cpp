#include "driftnet/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "driftnet/theory.hpp"

namespace driftnet {

namespace {

constexpr int kMaxRiskBatch = 4096;

// Risk against a truth function is the engine's least-squares loss on a
// facade set whose targets are the truth values, which keeps the batched
// kernels on the hot path instead of a per-row dense forward.
struct TruthEval {
    RegressionSet facade;
    BatchEngine engine;

    TruthEval(const Architecture& arch, std::int64_t max_rows)
        : engine(arch, static_cast<int>(std::min<std::int64_t>(max_rows, kMaxRiskBatch))) {
        facade.dim = arch.input_dim();
    }

    void load(const DriftTruth& truth, const double* rows, std::int64_t n) {
        facade.n = n;
        facade.inputs.assign(rows, rows + n * facade.dim);
        facade.targets.resize(n);
        for (std::int64_t k = 0; k < n; ++k)
            facade.targets[k] =
                truth({rows + k * facade.dim, static_cast<std::size_t>(facade.dim)});
    }
};

}  // namespace

double empirical_risk(const NetworkParams& fhat, const DriftTruth& truth,
                      const RegressionSet& data) {
    require_valid(fhat);
    if (!truth) throw std::invalid_argument("empirical_risk: missing truth function");
    if (data.n < 1) throw std::invalid_argument("empirical_risk: empty data");
    if (data.dim != fhat.arch.input_dim())
        throw std::invalid_argument("empirical_risk: dimension mismatch");
    TruthEval ev(fhat.arch, data.n);
    ev.load(truth, data.inputs.data(), data.n);
    return ev.engine.loss(fhat, ev.facade, 0, data.n);
}

RiskEstimate generalization_risk(const NetworkParams& fhat, const DriftTruth& truth,
                                 const SdeModel& model, std::int64_t n, double delta, int substeps,
                                 std::int64_t copies, std::uint64_t seed,
                                 const X0Sampler* x0_sampler) {
    require_valid(fhat);
    if (!truth) throw std::invalid_argument("generalization_risk: missing truth function");
    if (copies < 2) throw std::invalid_argument("generalization_risk: need at least 2 copies");
    if (n < 1) throw std::invalid_argument("generalization_risk: need n >= 1");
    if (model.dim != fhat.arch.input_dim())
        throw std::invalid_argument("generalization_risk: dimension mismatch");
    const X0Sampler sampler = x0_sampler ? *x0_sampler : point_mass_at_zero(model.dim);

    TruthEval ev(fhat.arch, n);
    double sum = 0.0, sumsq = 0.0;
    for_each_copy(model, sampler, n, delta, substeps, copies, seed,
                  [&](std::int64_t, const ObservedPath& path) {
                      // design points of the copy: the first n observations
                      ev.load(truth, path.obs.data(), n);
                      const double r = ev.engine.loss(fhat, ev.facade, 0, n);
                      sum += r;
                      sumsq += r * r;
                  });
    const double m = static_cast<double>(copies);
    RiskEstimate est;
    est.count = copies;
    est.mean = sum / m;
    const double var = std::max(0.0, (sumsq - m * est.mean * est.mean) / (m - 1.0));
    est.std_error = std::sqrt(var / m);
    return est;
}

RiskEstimate l2_pi_risk(const NetworkParams& fhat, const DriftTruth& truth, const SdeModel& model,
                        std::int64_t burn_in, std::int64_t horizon, double delta, int substeps,
                        std::uint64_t seed) {
    require_valid(fhat);
    if (!truth) throw std::invalid_argument("l2_pi_risk: missing truth function");
    if (horizon < 4) throw std::invalid_argument("l2_pi_risk: horizon must be >= 4");
    if (burn_in < 0) throw std::invalid_argument("l2_pi_risk: burn_in must be >= 0");
    if (model.dim != fhat.arch.input_dim())
        throw std::invalid_argument("l2_pi_risk: dimension mismatch");
    if (burn_in == 0) burn_in = std::max<std::int64_t>(horizon / 10, 100);

    std::vector<double> x0(model.dim, 0.0);
    const ObservedPath path = simulate_path(model, x0, burn_in + horizon, delta, substeps, seed);

    TruthEval ev(fhat.arch, horizon);
    ev.load(truth, path.obs.data() + burn_in * path.dim, horizon);

    const std::int64_t batches = std::clamp<std::int64_t>(horizon / 50, 2, 30);
    const std::int64_t per = horizon / batches;  // the remainder joins the last batch
    std::vector<double> means(batches, 0.0);
    double total = 0.0;
    for (std::int64_t b = 0; b < batches; ++b) {
        const std::int64_t lo = b * per;
        const std::int64_t hi = b + 1 == batches ? horizon : lo + per;
        means[b] = ev.engine.loss(fhat, ev.facade, lo, hi - lo);
        total += means[b] * static_cast<double>(hi - lo);
    }

    RiskEstimate est;
    est.count = batches;
    est.mean = total / static_cast<double>(horizon);
    double var = 0.0;
    for (double mb : means) var += (mb - est.mean) * (mb - est.mean);
    var /= static_cast<double>(batches - 1);
    est.std_error = std::sqrt(var / static_cast<double>(batches));
    return est;
}

SweepSummary rate_sweep(const std::vector<SweepCell>& cells, const ClassParams& cls) {
    cls.validate();
    if (cells.size() < 3)
        throw std::invalid_argument("rate_sweep: need at least 3 grid points");
    double prev_nd = 0.0, prev_nd2 = std::numeric_limits<double>::infinity();
    for (const auto& c : cells) {
        const double nd = static_cast<double>(c.n) * c.delta;
        if (!(c.delta > 0.0 && c.delta <= 1.0 && nd >= 2.0))
            throw std::invalid_argument(
                "sampling constraint violated, need delta <= 1 and n*delta >= 2");
        if (!(nd > prev_nd))
            throw std::invalid_argument(
                "rate_sweep: n*delta must increase strictly across the grid");
        const double nd2 = nd * c.delta;
        if (!(nd2 < prev_nd2))
            throw std::invalid_argument(
                "rate_sweep: n*delta^2 must decrease strictly across the grid");
        prev_nd = nd;
        prev_nd2 = nd2;
    }

    SweepSummary out;
    out.theory_exponent = rate_exponent(cls);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (!(cells[i].mean_risk > 0.0)) {
            out.excluded_cells.push_back(i);
            continue;
        }
        const double x = std::log(static_cast<double>(cells[i].n) * cells[i].delta);
        const double y = std::log(cells[i].mean_risk);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    out.points_used = m;
    if (m < 3) {
        out.slope = std::numeric_limits<double>::quiet_NaN();
        out.intercept = std::numeric_limits<double>::quiet_NaN();
        out.slope_defined = false;
        return out;
    }
    const double denom = m * sxx - sx * sx;
    out.slope = (m * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / m;
    out.slope_defined = true;
    return out;
}

}  // namespace driftnet
