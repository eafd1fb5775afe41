#include "aim/simd/kernels.hpp"

#include <cmath>

namespace aim::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void adam(const AdamCoeffs& c, double* params, const double* grad,
          double* m, double* v, double* delta, std::size_t n) {
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = c.beta1 * m[i] + one_minus_b1 * g;
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
        const double denom = std::sqrt(v[i] * c.inv_bias2) + c.eps;
        const double step = (c.step_size * m[i]) / denom;
        params[i] -= step;
        if (delta != nullptr) {
            delta[i] = step;
        }
    }
}

} // namespace aim::simd::scalar
