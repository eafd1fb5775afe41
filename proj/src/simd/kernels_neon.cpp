#if defined(__aarch64__)

#include "aim/simd/kernels.hpp"

#include <arm_neon.h>

namespace aim::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void adam(const AdamCoeffs& c, double* params, const double* grad,
          double* m, double* v, double* delta, std::size_t n) {
    const float64x2_t b1 = vdupq_n_f64(c.beta1);
    const float64x2_t b2 = vdupq_n_f64(c.beta2);
    const float64x2_t nb1 = vdupq_n_f64(1.0 - c.beta1);
    const float64x2_t nb2 = vdupq_n_f64(1.0 - c.beta2);
    const float64x2_t eps = vdupq_n_f64(c.eps);
    const float64x2_t step_size = vdupq_n_f64(c.step_size);
    const float64x2_t inv_bias2 = vdupq_n_f64(c.inv_bias2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t g = vld1q_f64(grad + i);
        const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(nb1, g));
        const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)),
                                         vmulq_f64(nb2, vmulq_f64(g, g)));
        vst1q_f64(m + i, mi);
        vst1q_f64(v + i, vi);
        const float64x2_t denom = vaddq_f64(vsqrtq_f64(vmulq_f64(vi, inv_bias2)), eps);
        const float64x2_t step = vdivq_f64(vmulq_f64(step_size, mi), denom);
        vst1q_f64(params + i, vsubq_f64(vld1q_f64(params + i), step));
        if (delta != nullptr) {
            vst1q_f64(delta + i, step);
        }
    }
    if (i < n) {
        scalar::adam(c, params + i, grad + i, m + i, v + i,
                     delta != nullptr ? delta + i : nullptr, n - i);
    }
}

} // namespace aim::simd::neon

#endif
