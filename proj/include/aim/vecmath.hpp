#pragma once

#include <span>
#include <vector>

namespace aim {

/// Flat parameter or gradient vector.
using ParamVector = std::vector<double>;

/// Norms below this are treated as zero: cosine against such a vector is 0
/// and projection onto it is the zero vector.
inline constexpr double kZeroNormThreshold = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// (a.b)/(|a||b|) clamped to [-1, 1]; 0 if either norm is below
/// kZeroNormThreshold.
double cosine(std::span<const double> a, std::span<const double> b);

/// Vector projection of a onto b, or zeros when |b| < kZeroNormThreshold.
ParamVector project(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

ParamVector add(std::span<const double> a, std::span<const double> b);
ParamVector sub(std::span<const double> a, std::span<const double> b);
ParamVector scaled(std::span<const double> a, double alpha);

bool all_finite(std::span<const double> a);

} // namespace aim
