#include "driftnet/sde.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace driftnet {

namespace {

constexpr double kExplosionRadius = 1e6;

void check_state(const std::vector<double>& x, std::int64_t obs_index, int micro_index) {
    double norm2 = 0.0;
    for (double c : x) norm2 += c * c;
    if (!std::isfinite(norm2) || norm2 > kExplosionRadius * kExplosionRadius) {
        throw SimulationError("state explosion at observation " + std::to_string(obs_index) +
                                  ", micro-step " + std::to_string(micro_index) +
                                  " (|x| > 1e6 or non-finite)",
                              obs_index, micro_index);
    }
}

}  // namespace

ObservedPath simulate_path(const SdeModel& model, std::span<const double> x0, std::int64_t n,
                           double delta, int substeps, std::uint64_t seed) {
    if (model.dim < 1 || !model.drift) throw std::invalid_argument("simulate_path: bad model");
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument(
            "simulate_path: sampling constraint violated, need delta <= 1 (and delta > 0)");
    if (n < 1) throw std::invalid_argument("simulate_path: n must be >= 1");
    if (substeps < 1) throw std::invalid_argument("simulate_path: substeps must be >= 1");
    if (static_cast<int>(x0.size()) != model.dim)
        throw std::invalid_argument("simulate_path: x0 dimension mismatch");

    const int d = model.dim;
    const double h = delta / substeps;
    const double sqrt_h = std::sqrt(h);

    ObservedPath path;
    path.dim = d;
    path.n = n;
    path.delta = delta;
    path.seed = seed;
    path.substeps = substeps;
    path.obs.resize(static_cast<std::size_t>(n + 1) * d);

    Rng rng(seed);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> b(d), z(d), sig;
    if (model.diffusion_kind == DiffusionKind::general) {
        if (!model.diffusion) throw std::invalid_argument("simulate_path: general diffusion missing");
        sig.resize(static_cast<std::size_t>(d) * d);
    }

    check_state(x, 0, 0);
    std::memcpy(path.obs.data(), x.data(), sizeof(double) * d);

    for (std::int64_t k = 0; k < n; ++k) {
        for (int j = 0; j < substeps; ++j) {
            model.drift(x.data(), b.data());
            switch (model.diffusion_kind) {
                case DiffusionKind::zero:
                    for (int i = 0; i < d; ++i) x[i] += b[i] * h;
                    break;
                case DiffusionKind::scaled_identity: {
                    const double amp = model.iso_scale * sqrt_h;
                    for (int i = 0; i < d; ++i) x[i] += b[i] * h + amp * rng.normal();
                    break;
                }
                case DiffusionKind::general: {
                    model.diffusion(x.data(), sig.data());
                    for (int i = 0; i < d; ++i) z[i] = rng.normal();
                    for (int i = 0; i < d; ++i) {
                        double noise = 0.0;
                        const double* row = sig.data() + static_cast<std::size_t>(i) * d;
                        for (int c = 0; c < d; ++c) noise += row[c] * z[c];
                        x[i] += b[i] * h + sqrt_h * noise;
                    }
                    break;
                }
            }
            check_state(x, k, j);
        }
        std::memcpy(path.obs.data() + static_cast<std::size_t>(k + 1) * d, x.data(),
                    sizeof(double) * d);
    }
    return path;
}

RegressionSet make_regression_set(const ObservedPath& path, int coord) {
    if (coord < 1 || coord > path.dim)
        throw std::out_of_range("make_regression_set: coord " + std::to_string(coord) +
                                " outside 1.." + std::to_string(path.dim));
    if (path.n < 1) throw std::invalid_argument("make_regression_set: need at least 2 observations");

    RegressionSet set;
    set.coord = coord;
    set.dim = path.dim;
    set.n = path.n;
    set.delta = path.delta;
    set.inputs.assign(path.obs.begin(), path.obs.begin() + path.n * path.dim);
    set.targets.resize(path.n);
    const int c = coord - 1;
    for (std::int64_t k = 0; k < path.n; ++k) {
        const double cur = path.obs[k * path.dim + c];
        const double nxt = path.obs[(k + 1) * path.dim + c];
        set.targets[k] = (nxt - cur) / path.delta;
    }
    return set;
}

X0Sampler point_mass_at_zero(int dim) {
    return [dim](Rng&) { return std::vector<double>(dim, 0.0); };
}

X0Sampler point_mass(std::vector<double> x0) {
    return [x0 = std::move(x0)](Rng&) { return x0; };
}

void for_each_copy(const SdeModel& model, const X0Sampler& x0_sampler, std::int64_t n,
                   double delta, int substeps, std::int64_t count, std::uint64_t seed,
                   const std::function<void(std::int64_t, const ObservedPath&)>& visit) {
    if (count < 1) throw std::invalid_argument("simulate_copies: count must be >= 1");
    for (std::int64_t j = 0; j < count; ++j) {
        const std::uint64_t path_seed = derive_seed(seed, static_cast<std::uint64_t>(j));
        Rng x0_rng(derive_seed(path_seed, 0x5EEDULL));
        const std::vector<double> x0 = x0_sampler(x0_rng);
        const ObservedPath path = simulate_path(model, x0, n, delta, substeps, path_seed);
        visit(j, path);
    }
}

std::vector<ObservedPath> simulate_copies(const SdeModel& model, const X0Sampler& x0_sampler,
                                          std::int64_t n, double delta, int substeps,
                                          std::int64_t count, std::uint64_t seed) {
    std::vector<ObservedPath> out;
    out.reserve(count);
    for_each_copy(model, x0_sampler, n, delta, substeps, count, seed,
                  [&](std::int64_t, const ObservedPath& p) { out.push_back(p); });
    return out;
}

OuMoments ou_reference_moments(double theta, double sigma, double x0, double t) {
    if (!(theta > 0.0)) throw std::domain_error("ou_reference_moments: theta must be > 0");
    if (t < 0.0) throw std::domain_error("ou_reference_moments: t must be >= 0");
    OuMoments m;
    m.mean = x0 * std::exp(-theta * t);
    m.variance = sigma * sigma * (1.0 - std::exp(-2.0 * theta * t)) / (2.0 * theta);
    return m;
}

SdeModel make_ou_model(double theta, double sigma, int dim) {
    SdeModel model;
    model.dim = dim;
    model.drift = [theta, dim](const double* x, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = -theta * x[i];
    };
    model.diffusion = [sigma, dim](const double*, double* out) {
        for (int i = 0; i < dim * dim; ++i) out[i] = 0.0;
        for (int i = 0; i < dim; ++i) out[i * dim + i] = sigma;
    };
    model.diffusion_kind = sigma == 0.0 ? DiffusionKind::zero : DiffusionKind::scaled_identity;
    model.iso_scale = sigma;
    model.drift_lipschitz_hint = theta;
    return model;
}

ModelProbeReport probe_model(const SdeModel& model, double radius, int points,
                             std::uint64_t seed) {
    ModelProbeReport rep;
    const int d = model.dim;
    Rng rng(seed);
    std::vector<double> x(d), y(d), bx(d), by(d), sig(static_cast<std::size_t>(d) * d);
    for (int p = 0; p < points; ++p) {
        for (int i = 0; i < d; ++i) {
            x[i] = rng.uniform(-radius, radius);
            y[i] = rng.uniform(-radius, radius);
        }
        model.drift(x.data(), bx.data());
        model.drift(y.data(), by.data());
        for (int i = 0; i < d; ++i)
            if (!std::isfinite(bx[i]) || !std::isfinite(by[i])) rep.finite_ok = false;
        if (model.diffusion) {
            model.diffusion(x.data(), sig.data());
            for (double s : sig)
                if (!std::isfinite(s)) rep.finite_ok = false;
        }
        double num = 0.0, den = 0.0;
        for (int i = 0; i < d; ++i) {
            num += (bx[i] - by[i]) * (bx[i] - by[i]);
            den += (x[i] - y[i]) * (x[i] - y[i]);
        }
        if (den > 0.0) {
            const double q = std::sqrt(num / den);
            rep.worst_quotient = std::max(rep.worst_quotient, q);
        }
    }
    if (model.drift_lipschitz_hint &&
        rep.worst_quotient > *model.drift_lipschitz_hint * (1.0 + 1e-6))
        rep.lipschitz_ok = false;
    return rep;
}

namespace {

constexpr char kPathMagic[9] = {'D', 'R', 'F', 'T', 'P', 'A', 'T', 'H', '1'};

static_assert(std::endian::native == std::endian::little,
              "path dump format is little-endian; big-endian hosts unsupported");

template <typename T>
void put(std::FILE* f, T v) {
    if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("write_path: io error");
}
template <typename T>
T get(std::FILE* f) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("read_path: io error");
    return v;
}

}  // namespace

void write_path(const ObservedPath& path, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("write_path: cannot open " + file);
    try {
        if (std::fwrite(kPathMagic, 1, sizeof(kPathMagic), f) != sizeof(kPathMagic))
            throw std::runtime_error("write_path: io error");
        put<std::uint32_t>(f, static_cast<std::uint32_t>(path.dim));
        put<std::uint64_t>(f, static_cast<std::uint64_t>(path.n));
        put<double>(f, path.delta);
        put<std::uint64_t>(f, path.seed);
        put<std::uint32_t>(f, static_cast<std::uint32_t>(path.substeps));
        if (std::fwrite(path.obs.data(), sizeof(double), path.obs.size(), f) != path.obs.size())
            throw std::runtime_error("write_path: io error");
    } catch (...) {
        std::fclose(f);
        throw;
    }
    if (std::fclose(f) != 0) throw std::runtime_error("write_path: close failed for " + file);
}

ObservedPath read_path(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "rb");
    if (!f) throw std::runtime_error("read_path: cannot open " + file);
    try {
        char magic[sizeof(kPathMagic)];
        if (std::fread(magic, 1, sizeof(magic), f) != sizeof(magic) ||
            std::memcmp(magic, kPathMagic, sizeof(magic)) != 0)
            throw std::runtime_error("read_path: bad magic (not a DRFTPATH1 file): " + file);
        ObservedPath path;
        path.dim = static_cast<int>(get<std::uint32_t>(f));
        path.n = static_cast<std::int64_t>(get<std::uint64_t>(f));
        path.delta = get<double>(f);
        path.seed = get<std::uint64_t>(f);
        path.substeps = static_cast<int>(get<std::uint32_t>(f));
        if (path.dim < 1 || path.n < 0) throw std::runtime_error("read_path: corrupt header");
        path.obs.resize(static_cast<std::size_t>(path.n + 1) * path.dim);
        if (std::fread(path.obs.data(), sizeof(double), path.obs.size(), f) != path.obs.size())
            throw std::runtime_error("read_path: truncated observations");
        std::fclose(f);
        return path;
    } catch (...) {
        std::fclose(f);
        throw;
    }
}

}  // namespace driftnet
