#pragma once
// Batch-lane compute kernels.
//
// Everything hot in this project — batched network forward/backward passes,
// squared-error reductions, parameter updates — reduces to a handful of
// primitives over contiguous double arrays. They are implemented twice:
// a scalar reference and an AVX2+FMA variant (NEON on aarch64), selected at
// runtime. The scalar reference accumulates through std::fma so the
// per-element operations (axpy, relu_shift, ...) are bit-identical across
// backends; reductions (dot, sum, sq_diff_sum) use a different summation
// order in the vector variants and are equivalence-tested to a tolerance
// instead.
//
// Selection: DRIFTNET_KERNELS=scalar|avx2|neon|auto (default auto = best
// variant the CPU supports). The choice is resolved once per process, so a
// run is deterministic end to end on a given machine.

#include <cstddef>

namespace driftnet::kern {

struct KernelTable {
    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // sum_i (a[i] - b[i])^2
    double (*sq_diff_sum)(const double* a, const double* b, std::size_t n);
    // out[i] = max(z[i] - v, 0)
    void (*relu_shift)(double* out, const double* z, double v, std::size_t n);
    // y[i] = gate[i] > 0 ? y[i] : 0
    void (*mul_mask)(double* y, const double* gate, std::size_t n);
    // y[i] = min(max(y[i], lo), hi)
    void (*clamp)(double* y, double lo, double hi, std::size_t n);
    // y[i] *= a
    void (*scale)(double* y, double a, std::size_t n);
    const char* name;
};

enum class Backend { scalar, avx2, neon };

// Table for an explicit backend; throws std::runtime_error if that variant
// was not compiled in or the CPU lacks the instructions.
const KernelTable& table(Backend b);
bool backend_available(Backend b);

// Pure selection rule (unit-tested separately from the environment).
Backend pick_backend(const char* env_value, bool cpu_avx2, bool cpu_neon);

// Process-wide active table, resolved once from DRIFTNET_KERNELS + cpuid.
const KernelTable& active();
Backend active_backend();

}  // namespace driftnet::kern
