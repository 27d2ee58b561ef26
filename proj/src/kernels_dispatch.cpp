#include <cstdlib>
#include <stdexcept>
#include <string>

#include "driftnet/kernels.hpp"

namespace driftnet::kern {

extern const KernelTable kScalarTable;
#if DRIFTNET_HAVE_AVX2_TU
extern const KernelTable kAvx2Table;
#endif
#if DRIFTNET_HAVE_NEON_TU
extern const KernelTable kNeonTable;
#endif

namespace {

bool cpu_has_avx2() {
#if DRIFTNET_HAVE_AVX2_TU && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool cpu_has_neon() {
#if DRIFTNET_HAVE_NEON_TU
    return true;  // NEON is baseline on aarch64.
#else
    return false;
#endif
}

}  // namespace

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
        case Backend::neon: return cpu_has_neon();
    }
    return false;
}

Backend pick_backend(const char* env_value, bool avx2_ok, bool neon_ok) {
    const std::string v = env_value ? env_value : "auto";
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") {
        if (!avx2_ok) throw std::runtime_error("DRIFTNET_KERNELS=avx2 but AVX2+FMA unavailable");
        return Backend::avx2;
    }
    if (v == "neon") {
        if (!neon_ok) throw std::runtime_error("DRIFTNET_KERNELS=neon but NEON unavailable");
        return Backend::neon;
    }
    if (v == "auto" || v.empty()) {
        if (avx2_ok) return Backend::avx2;
        if (neon_ok) return Backend::neon;
        return Backend::scalar;
    }
    throw std::runtime_error("unknown DRIFTNET_KERNELS value '" + v +
                             "' (expected auto|scalar|avx2|neon)");
}

const KernelTable& table(Backend b) {
    switch (b) {
        case Backend::scalar: return kScalarTable;
        case Backend::avx2:
#if DRIFTNET_HAVE_AVX2_TU
            if (cpu_has_avx2()) return kAvx2Table;
#endif
            throw std::runtime_error("AVX2 kernel variant unavailable on this machine");
        case Backend::neon:
#if DRIFTNET_HAVE_NEON_TU
            return kNeonTable;
#else
            throw std::runtime_error("NEON kernel variant unavailable on this machine");
#endif
    }
    throw std::runtime_error("bad kernel backend");
}

Backend active_backend() {
    static const Backend chosen =
        pick_backend(std::getenv("DRIFTNET_KERNELS"), cpu_has_avx2(), cpu_has_neon());
    return chosen;
}

const KernelTable& active() { return table(active_backend()); }

}  // namespace driftnet::kern
