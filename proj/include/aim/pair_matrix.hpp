#pragma once

#include <cstddef>
#include <vector>

namespace aim {

/// Dense N x N matrix of per-task-pair values, row-major.
struct PairMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    PairMatrix() = default;
    explicit PairMatrix(std::size_t size, double fill = 0.0) : n(size), values(size * size, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

} // namespace aim
