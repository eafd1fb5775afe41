#include "aim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace aim::baselines {

ParamVector ls_combine(const GradientBundle& bundle) {
    bundle.validate();
    ParamVector out(bundle.dim(), 0.0);
    for (const auto& g : bundle.grads) {
        axpy(1.0, g, out);
    }
    return out;
}

ParamVector pcgrad_combine(const GradientBundle& bundle, std::optional<std::uint64_t> shuffle_seed) {
    bundle.validate();
    const std::size_t n = bundle.n_tasks();
    std::optional<std::mt19937_64> rng;
    if (shuffle_seed) {
        rng.emplace(*shuffle_seed);
    }

    ParamVector out(bundle.dim(), 0.0);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                order.push_back(j);
            }
        }
        if (rng) {
            std::shuffle(order.begin(), order.end(), *rng);
        }
        ParamVector current = bundle.grads[i];
        for (std::size_t j : order) {
            const auto& gj = bundle.grads[j];
            const double d = dot(current, gj);
            const double jj = dot(gj, gj);
            if (d < 0.0 && std::sqrt(jj) >= kZeroNormThreshold) {
                axpy(-d / jj, gj, current);
            }
        }
        axpy(1.0, current, out);
    }
    return out;
}

} // namespace aim::baselines
