#include "aim/vecmath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aim/errors.hpp"
#include "aim/simd/kernels.hpp"

namespace aim {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
}

} // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "dot");
    return simd::active().dot(a.data(), b.data(), a.size());
}

double norm(std::span<const double> a) {
    return std::sqrt(simd::active().dot(a.data(), a.data(), a.size()));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "cosine");
    const double na = norm(a);
    const double nb = norm(b);
    if (na < kZeroNormThreshold || nb < kZeroNormThreshold) {
        return 0.0;
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

ParamVector project(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "project");
    ParamVector out(a.size(), 0.0);
    const double bb = dot(b, b);
    if (std::sqrt(bb) < kZeroNormThreshold) {
        return out;
    }
    simd::active().axpy(dot(a, b) / bb, b.data(), out.data(), out.size());
    return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("axpy: length mismatch");
    }
    simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

ParamVector add(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "add");
    ParamVector out(a.begin(), a.end());
    simd::active().axpy(1.0, b.data(), out.data(), out.size());
    return out;
}

ParamVector sub(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "sub");
    ParamVector out(a.begin(), a.end());
    simd::active().axpy(-1.0, b.data(), out.data(), out.size());
    return out;
}

ParamVector scaled(std::span<const double> a, double alpha) {
    ParamVector out(a.size());
    std::transform(a.begin(), a.end(), out.begin(), [alpha](double x) { return alpha * x; });
    return out;
}

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

} // namespace aim
