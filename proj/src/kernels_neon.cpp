// NEON kernel variant (aarch64 only; NEON is baseline there so no cpu check
// beyond the architecture). Mirrors the scalar reference the same way the
// AVX2 TU does: FMA per element, two-lane accumulators for reductions.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "driftnet/kernels.hpp"

namespace driftnet::kern {
namespace {

void axpy(double* y, double a, const double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) r = std::fma(x[i], y[i], r);
    return r;
}

double sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) r += x[i];
    return r;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r = std::fma(d, d, r);
    }
    return r;
}

void relu_shift(double* out, const double* z, double v, std::size_t n) {
    std::size_t i = 0;
    const float64x2_t vv = vdupq_n_f64(v);
    const float64x2_t zero = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vsubq_f64(vld1q_f64(z + i), vv);
        // select t where t > 0 (false for NaN), else +0 — matches scalar.
        const uint64x2_t m = vcgtq_f64(t, zero);
        vst1q_f64(out + i, vbslq_f64(m, t, zero));
    }
    for (; i < n; ++i) {
        const double t = z[i] - v;
        out[i] = t > 0.0 ? t : 0.0;
    }
}

void mul_mask(double* y, const double* gate, std::size_t n) {
    std::size_t i = 0;
    const float64x2_t zero = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t m = vcgtq_f64(vld1q_f64(gate + i), zero);
        vst1q_f64(y + i, vbslq_f64(m, vld1q_f64(y + i), zero));
    }
    for (; i < n; ++i) {
        if (!(gate[i] > 0.0)) y[i] = 0.0;
    }
}

void clamp(double* y, double lo, double hi, std::size_t n) {
    std::size_t i = 0;
    const float64x2_t vlo = vdupq_n_f64(lo), vhi = vdupq_n_f64(hi);
    const float64x2_t zero = vdupq_n_f64(0.0);
    (void)zero;
    for (; i + 2 <= n; i += 2) {
        float64x2_t t = vld1q_f64(y + i);
        // same select semantics as the scalar ternaries (NaN -> lo).
        t = vbslq_f64(vcgtq_f64(t, vlo), t, vlo);
        t = vbslq_f64(vcltq_f64(t, vhi), t, vhi);
        vst1q_f64(y + i, t);
    }
    for (; i < n; ++i) {
        double t = y[i] > lo ? y[i] : lo;
        y[i] = t < hi ? t : hi;
    }
}

void scale(double* y, double a, std::size_t n) {
    std::size_t i = 0;
    const float64x2_t va = vdupq_n_f64(a);
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

}  // namespace

extern const KernelTable kNeonTable;
const KernelTable kNeonTable = {axpy, dot, sum, sq_diff_sum, relu_shift,
                                mul_mask, clamp, scale, "neon"};

}  // namespace driftnet::kern

#endif  // __aarch64__
