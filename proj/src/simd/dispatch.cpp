#include "aim/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace aim::simd {

#if defined(AIM_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam(const AdamCoeffs& c, double* params, const double* grad,
          double* m, double* v, double* delta, std::size_t n);
} // namespace avx2
#endif

#if defined(AIM_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam(const AdamCoeffs& c, double* params, const double* grad,
          double* m, double* v, double* delta, std::size_t n);
} // namespace neon
#endif

namespace {

const Kernels kScalar{Backend::Scalar, &scalar::dot, &scalar::axpy, &scalar::adam};
#if defined(AIM_HAVE_AVX2)
const Kernels kAvx2{Backend::Avx2, &avx2::dot, &avx2::axpy, &avx2::adam};
#endif
#if defined(AIM_HAVE_NEON)
const Kernels kNeon{Backend::Neon, &neon::dot, &neon::axpy, &neon::adam};
#endif

Backend best_supported() {
    if (is_supported(Backend::Avx2)) {
        return Backend::Avx2;
    }
    if (is_supported(Backend::Neon)) {
        return Backend::Neon;
    }
    return Backend::Scalar;
}

Backend initial_backend() {
    const char* env = std::getenv("AIM_SIMD");
    if (env == nullptr || *env == '\0') {
        return best_supported();
    }
    const std::string requested(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
        if (requested == name(b) && is_supported(b)) {
            return b;
        }
    }
    return best_supported();
}

std::atomic<const Kernels*>& active_slot() {
    static std::atomic<const Kernels*> slot{&kernels_for(initial_backend())};
    return slot;
}

} // namespace

bool is_supported(Backend backend) {
    switch (backend) {
    case Backend::Scalar:
        return true;
    case Backend::Avx2:
#if defined(AIM_HAVE_AVX2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Backend::Neon:
#if defined(AIM_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const Kernels& kernels_for(Backend backend) {
    if (!is_supported(backend)) {
        throw std::runtime_error("SIMD backend not available: " + std::string(name(backend)));
    }
    switch (backend) {
#if defined(AIM_HAVE_AVX2)
    case Backend::Avx2:
        return kAvx2;
#endif
#if defined(AIM_HAVE_NEON)
    case Backend::Neon:
        return kNeon;
#endif
    default:
        return kScalar;
    }
}

const Kernels& active() {
    return *active_slot().load(std::memory_order_acquire);
}

void set_active(Backend backend) {
    active_slot().store(&kernels_for(backend), std::memory_order_release);
}

std::string_view name(Backend backend) {
    switch (backend) {
    case Backend::Scalar:
        return "scalar";
    case Backend::Avx2:
        return "avx2";
    case Backend::Neon:
        return "neon";
    }
    return "unknown";
}

} // namespace aim::simd
