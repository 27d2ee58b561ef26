#include "driftnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "driftnet/kernels.hpp"

namespace driftnet {

int Architecture::max_width() const {
    int w = 0;
    for (int p : widths) w = std::max(w, p);
    return w;
}

std::int64_t Architecture::total_entries() const {
    std::int64_t total = 0;
    for (int j = 0; j + 1 < static_cast<int>(widths.size()); ++j)
        total += static_cast<std::int64_t>(widths[j + 1]) * widths[j];
    for (int j = 1; j <= depth; ++j) total += widths[j];
    return total;
}

void Architecture::validate() const {
    if (depth < 1) throw std::invalid_argument("architecture: depth must be >= 1");
    if (static_cast<int>(widths.size()) != depth + 2)
        throw std::invalid_argument("architecture: widths must have depth+2 entries");
    for (int p : widths)
        if (p < 1) throw std::invalid_argument("architecture: widths must be >= 1");
    if (widths.back() != 1)
        throw std::invalid_argument("architecture: output width must be 1");
}

Architecture make_architecture(int input_dim, int depth, int hidden_width) {
    Architecture arch;
    arch.depth = depth;
    arch.widths.assign(depth + 2, hidden_width);
    arch.widths.front() = input_dim;
    arch.widths.back() = 1;
    arch.validate();
    return arch;
}

NetworkParams zero_network(const Architecture& arch, std::int64_t s, double F) {
    arch.validate();
    NetworkParams p;
    p.arch = arch;
    p.weights.resize(arch.depth + 1);
    for (int j = 0; j <= arch.depth; ++j)
        p.weights[j].assign(static_cast<std::size_t>(arch.widths[j + 1]) * arch.widths[j], 0.0);
    p.shifts.resize(arch.depth);
    for (int j = 1; j <= arch.depth; ++j) p.shifts[j - 1].assign(arch.widths[j], 0.0);
    p.sparsity_budget = s;
    p.sup_bound = F;
    return p;
}

std::vector<std::string> validate_params(const NetworkParams& p) {
    std::vector<std::string> bad;
    try {
        p.arch.validate();
    } catch (const std::exception& e) {
        bad.emplace_back(e.what());
        return bad;
    }
    const int L = p.arch.depth;
    if (static_cast<int>(p.weights.size()) != L + 1) {
        bad.emplace_back("params: expected depth+1 weight matrices");
        return bad;
    }
    if (static_cast<int>(p.shifts.size()) != L) {
        bad.emplace_back("params: expected depth shift vectors");
        return bad;
    }
    for (int j = 0; j <= L; ++j)
        if (p.weights[j].size() !=
            static_cast<std::size_t>(p.arch.widths[j + 1]) * p.arch.widths[j]) {
            bad.emplace_back("params: weight matrix " + std::to_string(j) + " has wrong shape");
            return bad;
        }
    for (int j = 1; j <= L; ++j)
        if (static_cast<int>(p.shifts[j - 1].size()) != p.arch.widths[j]) {
            bad.emplace_back("params: shift vector " + std::to_string(j) + " has wrong shape");
            return bad;
        }

    double mag = 0.0;
    bool finite = true;
    for (const auto& w : p.weights)
        for (double v : w) {
            if (!std::isfinite(v)) finite = false;
            mag = std::max(mag, std::abs(v));
        }
    for (const auto& s : p.shifts)
        for (double v : s) {
            if (!std::isfinite(v)) finite = false;
            mag = std::max(mag, std::abs(v));
        }
    if (!finite) bad.emplace_back("params: non-finite entry");
    if (mag > 1.0)
        bad.emplace_back("params: magnitude bound violated (|entry| = " + std::to_string(mag) +
                         " > 1)");
    const std::int64_t nnz = count_nonzero(p);
    if (nnz > p.sparsity_budget)
        bad.emplace_back("params: sparsity budget violated (" + std::to_string(nnz) + " > " +
                         std::to_string(p.sparsity_budget) + ")");
    if (!(p.sup_bound >= 1.0)) bad.emplace_back("params: sup bound F must be >= 1");
    return bad;
}

void require_valid(const NetworkParams& p) {
    const auto bad = validate_params(p);
    if (bad.empty()) return;
    std::string msg = "invalid network parameters:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw std::invalid_argument(msg);
}

std::vector<double> shifted_relu(std::span<const double> v, std::span<const double> y) {
    if (v.size() != y.size())
        throw std::invalid_argument("shifted_relu: shape mismatch (" + std::to_string(v.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = y[i] - v[i];
        out[i] = t > 0.0 ? t : 0.0;
    }
    return out;
}

namespace {

double eval_inside(const NetworkParams& p, std::span<const double> x) {
    const int L = p.arch.depth;
    const int wmax = p.arch.max_width();
    std::vector<double> cur(wmax, 0.0), nxt(wmax, 0.0);
    std::copy(x.begin(), x.end(), cur.begin());
    for (int j = 0; j <= L; ++j) {
        const int pin = p.arch.widths[j];
        const int pout = p.arch.widths[j + 1];
        const double* W = p.weights[j].data();
        for (int i = 0; i < pout; ++i) {
            double acc = 0.0;
            const double* row = W + static_cast<std::size_t>(i) * pin;
            for (int k = 0; k < pin; ++k)
                if (row[k] != 0.0) acc += row[k] * cur[k];
            nxt[i] = acc;
        }
        if (j < L) {
            const auto& v = p.shifts[j];
            for (int i = 0; i < pout; ++i) {
                const double t = nxt[i] - v[i];
                cur[i] = t > 0.0 ? t : 0.0;
            }
        } else {
            return nxt[0];
        }
    }
    return 0.0;  // unreachable
}

bool in_cube(std::span<const double> x) {
    for (double c : x)
        if (!(c >= 0.0 && c <= 1.0)) return false;
    return true;
}

}  // namespace

double forward_unchecked(const NetworkParams& p, std::span<const double> x) {
    if (!in_cube(x)) return 0.0;
    const double raw = eval_inside(p, x);
    const double F = p.sup_bound;
    return raw > F ? F : (raw < -F ? -F : raw);
}

double forward(const NetworkParams& p, std::span<const double> x) {
    require_valid(p);
    if (static_cast<int>(x.size()) != p.arch.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    return forward_unchecked(p, x);
}

std::int64_t count_nonzero(const NetworkParams& p) {
    std::int64_t nnz = 0;
    for (const auto& w : p.weights)
        for (double v : w)
            if (v != 0.0) ++nnz;
    for (const auto& s : p.shifts)
        for (double v : s)
            if (v != 0.0) ++nnz;
    return nnz;
}

namespace {

// canonical block order: W_0, v_1, W_1, v_2, ..., v_L, W_L
std::vector<std::vector<double>*> canonical_blocks(NetworkParams& p) {
    std::vector<std::vector<double>*> blocks;
    blocks.push_back(&p.weights[0]);
    for (int j = 1; j <= p.arch.depth; ++j) {
        blocks.push_back(&p.shifts[j - 1]);
        blocks.push_back(&p.weights[j]);
    }
    return blocks;
}

// clip, then keep the s largest magnitudes (earlier canonical position wins
// ties); s may be 0 here — the public wrapper enforces its own precondition.
void clip_and_threshold(NetworkParams& p, std::int64_t s, double clip) {
    auto blocks = canonical_blocks(p);
    struct Entry {
        double mag;
        std::int64_t ordinal;
        double* slot;
    };
    std::vector<Entry> nonzero;
    std::int64_t ordinal = 0;
    for (auto* block : blocks)
        for (double& v : *block) {
            if (v > clip) v = clip;
            if (v < -clip) v = -clip;
            if (v != 0.0) nonzero.push_back({std::abs(v), ordinal, &v});
            ++ordinal;
        }
    if (static_cast<std::int64_t>(nonzero.size()) > s) {
        std::nth_element(nonzero.begin(), nonzero.begin() + s, nonzero.end(),
                         [](const Entry& a, const Entry& b) {
                             if (a.mag != b.mag) return a.mag > b.mag;
                             return a.ordinal < b.ordinal;
                         });
        for (std::size_t i = s; i < nonzero.size(); ++i) *nonzero[i].slot = 0.0;
    }
}

bool feasible(const NetworkParams& p, std::int64_t s, double clip) {
    for (const auto& w : p.weights)
        for (double v : w)
            if (std::abs(v) > clip) return false;
    for (const auto& sh : p.shifts)
        for (double v : sh)
            if (std::abs(v) > clip) return false;
    return count_nonzero(p) <= s;
}

}  // namespace

NetworkParams project_params(const NetworkParams& params, std::int64_t s, double clip) {
    if (s < 2) throw std::invalid_argument("project_params: budget s must be >= 2");
    NetworkParams out = params;
    out.sparsity_budget = s;
    if (feasible(params, s, clip)) return out;
    clip_and_threshold(out, s, clip);
    return out;
}

NetworkParams init_params(const Architecture& arch, std::int64_t s, double F, InitScheme scheme,
                          std::uint64_t seed, std::int64_t core) {
    arch.validate();
    NetworkParams p = zero_network(arch, s, F);
    const std::int64_t total = arch.total_entries();
    std::int64_t budget = std::min(s, total);
    if (budget <= 0) return p;
    if (core < 0 || core > budget) core = budget;
    Rng rng(seed);
    const int L = arch.depth;

    switch (scheme) {
        case InitScheme::uniform_pm1_scaled: {
            for (int j = 0; j <= L; ++j) {
                const double fan = arch.widths[j] + arch.widths[j + 1];
                const double a = std::min(1.0, std::sqrt(6.0 / fan));
                for (double& v : p.weights[j]) v = rng.uniform(-a, a);
            }
            for (int j = 1; j <= L; ++j)
                for (double& v : p.shifts[j - 1]) v = rng.uniform(-0.05, 0.05);
            clip_and_threshold(p, budget, 1.0);
            break;
        }
        case InitScheme::zeros_plus_sparse: {
            // Parallel input->output rails with unit-strength chain links so
            // gradients stay alive at any depth. Up to three rails: an input
            // ramp, a bias-only constant, and an opposite-sign ramp, each with
            // its own output weight. A single rail cannot trade slope against
            // level (its output weight scales both, and flipping its sign
            // passes through a saddle where the rail goes silent); with the
            // trio, {slope+, slope-, level} are independent features and the
            // output layer alone can already fit any a*ridge + b. Rail entries
            // use high magnitudes so thresholding prunes extras first.
            auto take = [&budget]() {
                if (budget <= 0) return false;
                --budget;
                return true;
            };
            int min_width = arch.widths[1];
            for (int j = 1; j <= L; ++j) min_width = std::min(min_width, arch.widths[j]);
            // entry cost: ramp rail L+2, constant rail L+1, second ramp L+2;
            // all rails must fit inside `core` or a hard re-projection cuts
            // the output weights and leaves the zero function
            int affordable = 0;
            if (core >= L + 2) affordable = 1;
            if (core >= 2 * L + 3) affordable = 2;
            if (core >= 3 * L + 5) affordable = 3;
            const int rails = std::min({3, min_width, std::max(affordable, 1)});

            const std::int64_t budget0 = budget;

            // rail r occupies hidden index (base[j] + r) % widths[j] in layer j
            std::vector<int> base(L + 1);
            for (int j = 1; j <= L; ++j) base[j] = static_cast<int>(rng.below(arch.widths[j]));
            auto unit = [&](int rail, int j) {
                return (base[j] + rail) % arch.widths[j];
            };
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            const double out_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;

            for (int r = 0; r < rails; ++r) {
                const int u1 = unit(r, 1);
                if (r == 1) {
                    // constant rail: no input weight, negative shift emits a level
                    if (take()) p.shifts[0][u1] = -rng.uniform(0.6, 1.0);
                } else {
                    const double dir = r == 0 ? sign : -sign;
                    const double w0 = dir * rng.uniform(0.7, 1.0);
                    const int c0 = static_cast<int>(rng.below(arch.widths[0]));
                    if (take())
                        p.weights[0][static_cast<std::size_t>(u1) * arch.widths[0] + c0] = w0;
                    if (take()) p.shifts[0][u1] = w0 * rng.uniform(0.0, 1.0);  // kink in [0,1]
                }
                for (int j = 1; j < L; ++j)
                    if (take())
                        p.weights[j][static_cast<std::size_t>(unit(r, j + 1)) * arch.widths[j] +
                                     unit(r, j)] = 1.0;
                const double os = r == 2 ? -out_sign : out_sign;
                if (take()) p.weights[L][unit(r, L)] = os * rng.uniform(0.7, 0.9);
            }

            // extra first-layer ridges routed into the main rail at layer 2;
            // magnitudes below the rail range so projection cuts them first.
            // They must also fit inside `core` together with the rails: extras
            // above the hard budget would compete by magnitude against the
            // rails' mid-sized output weights at every hard projection and can
            // evict them, silencing the rail in every scored candidate.
            std::int64_t core_left = core - (budget0 - budget);
            std::vector<int> rail_units;
            for (int r = 0; r < rails; ++r) rail_units.push_back(unit(r, 1));
            for (int u = 0; u < arch.widths[1]; ++u) {
                if (std::find(rail_units.begin(), rail_units.end(), u) != rail_units.end())
                    continue;
                if (budget < 3 || core_left < 3) break;
                core_left -= 3;
                const int cc = static_cast<int>(rng.below(arch.widths[0]));
                const double ws = rng.uniform() < 0.5 ? -1.0 : 1.0;
                const double wmag = ws * rng.uniform(0.3, 0.6);
                take();
                p.weights[0][static_cast<std::size_t>(u) * arch.widths[0] + cc] = wmag;
                take();
                p.shifts[0][u] = wmag * rng.uniform(0.0, 1.0);
                take();
                const double route =
                    (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 0.5);
                if (L == 1) {
                    p.weights[1][u] = route;
                } else {
                    p.weights[1][static_cast<std::size_t>(unit(0, 2)) * arch.widths[1] + u] =
                        route;
                }
            }
            break;
        }
    }
    return p;
}

ParamBuffers ParamBuffers::zeros_like(const Architecture& arch) {
    ParamBuffers b;
    b.weights.resize(arch.depth + 1);
    for (int j = 0; j <= arch.depth; ++j)
        b.weights[j].assign(static_cast<std::size_t>(arch.widths[j + 1]) * arch.widths[j], 0.0);
    b.shifts.resize(arch.depth);
    for (int j = 1; j <= arch.depth; ++j) b.shifts[j - 1].assign(arch.widths[j], 0.0);
    return b;
}

void ParamBuffers::fill(double value) {
    for (auto& w : weights) std::fill(w.begin(), w.end(), value);
    for (auto& s : shifts) std::fill(s.begin(), s.end(), value);
}

ParamMask ParamMask::none(const Architecture& arch) {
    ParamMask m;
    m.weights.resize(arch.depth + 1);
    for (int j = 0; j <= arch.depth; ++j)
        m.weights[j].assign(static_cast<std::size_t>(arch.widths[j + 1]) * arch.widths[j], 0);
    m.shifts.resize(arch.depth);
    for (int j = 1; j <= arch.depth; ++j) m.shifts[j - 1].assign(arch.widths[j], 0);
    return m;
}

ParamMask ParamMask::all(const Architecture& arch) {
    ParamMask m = none(arch);
    for (auto& w : m.weights) std::fill(w.begin(), w.end(), 1);
    for (auto& s : m.shifts) std::fill(s.begin(), s.end(), 1);
    return m;
}

ParamMask ParamMask::support(const NetworkParams& p) {
    ParamMask m = none(p.arch);
    for (std::size_t j = 0; j < p.weights.size(); ++j)
        for (std::size_t i = 0; i < p.weights[j].size(); ++i)
            m.weights[j][i] = p.weights[j][i] != 0.0;
    for (std::size_t j = 0; j < p.shifts.size(); ++j)
        for (std::size_t i = 0; i < p.shifts[j].size(); ++i)
            m.shifts[j][i] = p.shifts[j][i] != 0.0;
    return m;
}

std::int64_t ParamMask::count() const {
    std::int64_t c = 0;
    for (const auto& w : weights)
        for (auto b : w) c += b;
    for (const auto& s : shifts)
        for (auto b : s) c += b;
    return c;
}

BatchEngine::BatchEngine(Architecture arch, int max_batch) : arch_(std::move(arch)), max_batch_(max_batch) {
    arch_.validate();
    if (max_batch_ < 1) throw std::invalid_argument("BatchEngine: max_batch must be >= 1");
    const std::size_t B = static_cast<std::size_t>(max_batch_);
    act_.resize(arch_.depth + 1);
    act_[0].assign(static_cast<std::size_t>(arch_.widths[0]) * B, 0.0);
    for (int j = 1; j <= arch_.depth; ++j)
        act_[j].assign(static_cast<std::size_t>(arch_.widths[j]) * B, 0.0);
    const std::size_t wmax = static_cast<std::size_t>(arch_.max_width());
    z_.assign(wmax * B, 0.0);
    da_.assign(wmax * B, 0.0);
    dz_.assign(wmax * B, 0.0);
    raw_.assign(B, 0.0);
    y_.assign(B, 0.0);
    err_.assign(B, 0.0);
    gate_.assign(B, 0.0);
    cube_.assign(B, 0.0);
}

double BatchEngine::run_chunk(const NetworkParams& params, const ParamMask* mask,
                              const RegressionSet& data, std::int64_t start, std::int64_t count,
                              ParamBuffers* out) {
    const auto& K = kern::active();
    const int B = static_cast<int>(count);
    const int d = arch_.widths[0];
    const int L = arch_.depth;
    const std::int64_t n = data.n;

    // gather the slice into input lanes; flag off-cube samples
    for (int c = 0; c < B; ++c) {
        const std::int64_t idx = (start + c) % n;
        const double* row = data.inputs.data() + idx * d;
        bool inside = true;
        for (int r = 0; r < d; ++r) {
            act_[0][static_cast<std::size_t>(r) * max_batch_ + c] = row[r];
            if (!(row[r] >= 0.0 && row[r] <= 1.0)) inside = false;
        }
        cube_[c] = inside ? 1.0 : 0.0;
        y_[c] = data.targets[idx];
    }

    // forward
    for (int j = 0; j <= L; ++j) {
        const int pin = arch_.widths[j];
        const int pout = arch_.widths[j + 1];
        const double* W = params.weights[j].data();
        const double* alev = j == 0 ? act_[0].data() : act_[j].data();
        for (int i = 0; i < pout; ++i)
            std::memset(z_.data() + static_cast<std::size_t>(i) * max_batch_, 0,
                        sizeof(double) * B);
        for (int i = 0; i < pout; ++i) {
            double* zrow = z_.data() + static_cast<std::size_t>(i) * max_batch_;
            const double* wrow = W + static_cast<std::size_t>(i) * pin;
            for (int k = 0; k < pin; ++k)
                if (wrow[k] != 0.0)
                    K.axpy(zrow, wrow[k], alev + static_cast<std::size_t>(k) * max_batch_, B);
        }
        if (j < L) {
            const auto& v = params.shifts[j];
            for (int i = 0; i < pout; ++i)
                K.relu_shift(act_[j + 1].data() + static_cast<std::size_t>(i) * max_batch_,
                             z_.data() + static_cast<std::size_t>(i) * max_batch_, v[i], B);
        } else {
            std::memcpy(raw_.data(), z_.data(), sizeof(double) * B);
        }
    }

    // clipped/indicated error and loss
    const double F = params.sup_bound;
    for (int c = 0; c < B; ++c) {
        double f = 0.0;
        if (cube_[c] != 0.0) {
            f = raw_[c];
            if (f > F) f = F;
            if (f < -F) f = -F;
        }
        err_[c] = f - y_[c];
    }
    const double sse = K.dot(err_.data(), err_.data(), B);
    if (!out) return sse;

    // backward: top delta, zero gradient where clamp or indicator is active
    const double scale2 = 2.0 / B;
    for (int c = 0; c < B; ++c) {
        const bool live = cube_[c] != 0.0 && std::abs(raw_[c]) < F;
        dz_[c] = live ? scale2 * err_[c] : 0.0;
    }

    double* dzp = dz_.data();
    double* dap = da_.data();
    for (int j = L; j >= 0; --j) {
        const int pin = arch_.widths[j];
        const int pout = arch_.widths[j + 1];
        const double* W = params.weights[j].data();
        const double* alev = j == 0 ? act_[0].data() : act_[j].data();
        for (int k = 0; k < pin; ++k)
            std::memset(dap + static_cast<std::size_t>(k) * max_batch_, 0, sizeof(double) * B);
        for (int i = 0; i < pout; ++i) {
            const double* dzrow = dzp + static_cast<std::size_t>(i) * max_batch_;
            const double* wrow = W + static_cast<std::size_t>(i) * pin;
            const std::uint8_t* mrow =
                mask ? mask->weights[j].data() + static_cast<std::size_t>(i) * pin : nullptr;
            for (int k = 0; k < pin; ++k) {
                const bool want_dw = mrow ? mrow[k] != 0 : wrow[k] != 0.0;
                if (want_dw)
                    out->weights[j][static_cast<std::size_t>(i) * pin + k] =
                        K.dot(dzrow, alev + static_cast<std::size_t>(k) * max_batch_, B);
                if (wrow[k] != 0.0)
                    K.axpy(dap + static_cast<std::size_t>(k) * max_batch_, wrow[k], dzrow, B);
            }
        }
        if (j > 0) {
            // through the shifted ReLU: mask by activation>0, shift gradients
            const std::uint8_t* smask = mask ? mask->shifts[j - 1].data() : nullptr;
            for (int i = 0; i < pin; ++i) {
                double* darow = dap + static_cast<std::size_t>(i) * max_batch_;
                K.mul_mask(darow, act_[j].data() + static_cast<std::size_t>(i) * max_batch_, B);
                if (!smask || smask[i]) out->shifts[j - 1][i] = -K.sum(darow, B);
            }
            std::swap(dzp, dap);
        }
    }
    return sse;
}

double BatchEngine::loss(const NetworkParams& params, const RegressionSet& data,
                         std::int64_t start, std::int64_t count) {
    if (count < 1) throw std::invalid_argument("BatchEngine::loss: empty slice");
    double sse = 0.0;
    std::int64_t done = 0;
    while (done < count) {
        const std::int64_t chunk = std::min<std::int64_t>(max_batch_, count - done);
        sse += run_chunk(params, nullptr, data, (start + done) % data.n, chunk, nullptr);
        done += chunk;
    }
    return sse / static_cast<double>(count);
}

double BatchEngine::gradient(const NetworkParams& params, const ParamMask& mask,
                             const RegressionSet& data, std::int64_t start, std::int64_t count,
                             ParamBuffers& out) {
    if (count < 1 || count > max_batch_)
        throw std::invalid_argument("BatchEngine::gradient: bad batch size");
    out.fill(0.0);
    const double sse = run_chunk(params, &mask, data, start % data.n, count, &out);
    return sse / static_cast<double>(count);
}

LsqGradient grad_lsq(const NetworkParams& params, const RegressionSet& data, std::int64_t start,
                     std::int64_t count, const ParamMask* mask) {
    require_valid(params);
    if (data.n < 1) throw std::invalid_argument("grad_lsq: empty data");
    if (count < 1) throw std::invalid_argument("grad_lsq: empty batch");
    if (params.arch.input_dim() != data.dim)
        throw std::invalid_argument("grad_lsq: dimension mismatch");
    BatchEngine engine(params.arch, static_cast<int>(count));
    LsqGradient res;
    res.grads = ParamBuffers::zeros_like(params.arch);
    const ParamMask m = mask ? *mask : ParamMask::all(params.arch);
    res.loss = engine.gradient(params, m, data, start, count, res.grads);
    return res;
}

namespace {

constexpr char kNetMagic[8] = {'D', 'R', 'F', 'T', 'N', 'E', 'T', '1'};

template <typename T>
void put(std::FILE* f, T v) {
    if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("write_network: io error");
}
template <typename T>
T get(std::FILE* f) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("read_network: io error");
    return v;
}
void put_block(std::FILE* f, const std::vector<double>& v) {
    if (std::fwrite(v.data(), sizeof(double), v.size(), f) != v.size())
        throw std::runtime_error("write_network: io error");
}
void get_block(std::FILE* f, std::vector<double>& v) {
    if (std::fread(v.data(), sizeof(double), v.size(), f) != v.size())
        throw std::runtime_error("read_network: truncated");
}

}  // namespace

void write_network(const NetworkParams& params, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("write_network: cannot open " + file);
    try {
        if (std::fwrite(kNetMagic, 1, sizeof(kNetMagic), f) != sizeof(kNetMagic))
            throw std::runtime_error("write_network: io error");
        put<std::uint32_t>(f, static_cast<std::uint32_t>(params.arch.depth));
        for (int w : params.arch.widths) put<std::uint32_t>(f, static_cast<std::uint32_t>(w));
        put<double>(f, params.sup_bound);
        put<std::int64_t>(f, params.sparsity_budget);
        for (const auto& w : params.weights) put_block(f, w);
        for (const auto& s : params.shifts) put_block(f, s);
    } catch (...) {
        std::fclose(f);
        throw;
    }
    if (std::fclose(f) != 0) throw std::runtime_error("write_network: close failed");
}

NetworkParams read_network(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "rb");
    if (!f) throw std::runtime_error("read_network: cannot open " + file);
    try {
        char magic[sizeof(kNetMagic)];
        if (std::fread(magic, 1, sizeof(magic), f) != sizeof(magic) ||
            std::memcmp(magic, kNetMagic, sizeof(magic)) != 0)
            throw std::runtime_error("read_network: bad magic (not a DRFTNET1 file): " + file);
        Architecture arch;
        arch.depth = static_cast<int>(get<std::uint32_t>(f));
        if (arch.depth < 1 || arch.depth > 1 << 20)
            throw std::runtime_error("read_network: corrupt header");
        arch.widths.resize(arch.depth + 2);
        for (int& w : arch.widths) w = static_cast<int>(get<std::uint32_t>(f));
        arch.validate();
        NetworkParams p = zero_network(arch, 0, 1.0);
        p.sup_bound = get<double>(f);
        p.sparsity_budget = get<std::int64_t>(f);
        for (auto& w : p.weights) get_block(f, w);
        for (auto& s : p.shifts) get_block(f, s);
        std::fclose(f);
        return p;
    } catch (...) {
        std::fclose(f);
        throw;
    }
}

}  // namespace driftnet
