#pragma once
// Flat double-precision kernels with a scalar reference and ISA-specific
// variants. Every variant of `adam` and `axpy` performs the same rounding
// sequence as the scalar kernel (no fused multiply-add), so those outputs are
// bitwise identical across backends. `dot` reassociates the sum and agrees
// with the scalar kernel to a few ulps of sum(|a_i b_i|).

#include <cstddef>
#include <string_view>

namespace aim::simd {

enum class Backend { Scalar, Avx2, Neon };

struct AdamCoeffs {
    double beta1;
    double beta2;
    double eps;
    double step_size;   // lr / (1 - beta1^t)
    double inv_bias2;   // 1 / (1 - beta2^t)
};

struct Kernels {
    Backend backend;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Moment update plus parameter step. delta receives the amount subtracted
    // from params; it may be null.
    void (*adam)(const AdamCoeffs& c, double* params, const double* grad,
                 double* m, double* v, double* delta, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam(const AdamCoeffs& c, double* params, const double* grad,
          double* m, double* v, double* delta, std::size_t n);
} // namespace scalar

/// Kernels for the backend chosen at startup (best supported ISA, or the
/// AIM_SIMD environment variable: "scalar", "avx2", "neon").
const Kernels& active();

/// Kernel table for a specific backend; throws if not compiled in or not
/// supported by the running CPU.
const Kernels& kernels_for(Backend backend);

bool is_supported(Backend backend);

/// Overrides the active backend for the whole process. Not thread-safe with
/// concurrent kernel calls; intended for tests and the CLI.
void set_active(Backend backend);

std::string_view name(Backend backend);

} // namespace aim::simd
