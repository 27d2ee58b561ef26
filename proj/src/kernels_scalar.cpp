// Scalar reference kernels. Per-element operations go through std::fma so the
// vector backends (which use hardware FMA) produce bit-identical results for
// them; see kernels.hpp.

#include <cmath>
#include <cstddef>

#include "driftnet/kernels.hpp"

namespace driftnet::kern {
namespace {

void axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc = std::fma(d, d, acc);
    }
    return acc;
}

void relu_shift(double* out, const double* z, double v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double t = z[i] - v;
        out[i] = t > 0.0 ? t : 0.0;
    }
}

void mul_mask(double* y, const double* gate, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(gate[i] > 0.0)) y[i] = 0.0;
    }
}

void clamp(double* y, double lo, double hi, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double t = y[i] > lo ? y[i] : lo;
        y[i] = t < hi ? t : hi;
    }
}

void scale(double* y, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

}  // namespace

extern const KernelTable kScalarTable;
const KernelTable kScalarTable = {axpy, dot, sum, sq_diff_sum, relu_shift,
                                  mul_mask, clamp, scale, "scalar"};

}  // namespace driftnet::kern
