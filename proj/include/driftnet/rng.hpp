#pragma once
// Deterministic random numbers for all simulation and training code.
//
// Generator: SplitMix64 (Steele/Lea/Flood 2014 finalizer). Chosen because it is
// trivially splittable: independent streams are derived by hashing a stream
// index into the seed, which is what makes parallel path simulation
// reproducible regardless of scheduling. Normals come from Box-Muller with a
// one-value cache.

#include <cmath>
#include <cstdint>
#include <span>

namespace driftnet {

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer; also used as the hash for stream derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derived seed for sub-stream `index` of `seed` (paths, restarts, cells, ...).
// The combination is re-hashed so that derivation composes asymmetrically:
// a plain XOR would make derive(derive(s, a), b) == derive(derive(s, b), a)
// and derive(derive(s, a), a) == s, aliasing sub-streams across runs.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + kSplitMixGamma));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += kSplitMixGamma;
        return mix64(state_);
    }

    // Uniform on [0, 1): 53 random mantissa bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller. The pair is generated together and the
    // second value cached, so draws stay aligned with the u64 stream in a
    // reproducible way.
    double normal() noexcept {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cache_ = rad * std::sin(ang);
        have_cache_ = true;
        return rad * std::cos(ang);
    }

    void fill_normal(std::span<double> out) noexcept {
        for (double& x : out) x = normal();
    }

    // Integer in [0, n); n > 0. Bias is negligible for n << 2^64 but we use
    // rejection anyway to keep the distribution exact.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    std::uint64_t state() const noexcept { return state_; }

  private:
    std::uint64_t state_;
    double cache_ = 0.0;
    bool have_cache_ = false;
};

}  // namespace driftnet
