// AVX2+FMA kernel variant. This TU is the only one compiled with -mavx2
// -mfma; it must not be entered unless the dispatcher verified cpu support.
//
// Per-element ops mirror the scalar reference exactly (single-rounding FMA,
// same NaN/signed-zero behavior of max/cmp). Reductions accumulate in two
// vector lanes-of-4 and fold at the end, so their rounding differs from the
// sequential reference within ~1 ulp per element; tests bound the relative
// difference at 1e-13.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "driftnet/kernels.hpp"

namespace driftnet::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r = std::fma(d, d, r);
    }
    return r;
}

void relu_shift(double* out, const double* z, double v, std::size_t n) {
    const __m256d vv = _mm256_set1_pd(v);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max(t, 0) with NaN -> 0, matching the scalar ternary.
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(z + i), vv);
        _mm256_storeu_pd(out + i, _mm256_max_pd(t, zero));
    }
    for (; i < n; ++i) {
        const double t = z[i] - v;
        out[i] = t > 0.0 ? t : 0.0;
    }
}

void mul_mask(double* y, const double* gate, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(gate + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_and_pd(_mm256_loadu_pd(y + i), m));
    }
    for (; i < n; ++i) {
        if (!(gate[i] > 0.0)) y[i] = 0.0;
    }
}

void clamp(double* y, double lo, double hi, std::size_t n) {
    const __m256d vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_max_pd(_mm256_loadu_pd(y + i), vlo);
        _mm256_storeu_pd(y + i, _mm256_min_pd(t, vhi));
    }
    for (; i < n; ++i) {
        double t = y[i] > lo ? y[i] : lo;
        y[i] = t < hi ? t : hi;
    }
}

void scale(double* y, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table = {axpy, dot, sum, sq_diff_sum, relu_shift,
                                mul_mask, clamp, scale, "avx2"};

}  // namespace driftnet::kern
