#pragma once
// Shared fixtures: seeded random bundles and finite-difference oracles.

#include <aim/aim_policy.hpp>
#include <aim/vecmath.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace aim::testing {

inline ParamVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> nd(0.0, 1.0);
    ParamVector v(dim);
    for (auto& x : v) {
        x = nd(rng);
    }
    return v;
}

inline GradientBundle random_bundle(std::mt19937_64& rng, std::size_t n_tasks, std::size_t dim) {
    std::uniform_real_distribution<double> loss(0.1, 2.0);
    GradientBundle b;
    for (std::size_t i = 0; i < n_tasks; ++i) {
        b.grads.push_back(random_vector(rng, dim));
        b.losses.push_back(loss(rng));
    }
    return b;
}

/// Two-task bundle whose gradients are not near-orthogonal.
inline GradientBundle random_pair_bundle(std::mt19937_64& rng, std::size_t dim, double min_abs_cos) {
    for (;;) {
        GradientBundle b = random_bundle(rng, 2, dim);
        if (std::abs(cosine(b.grads[0], b.grads[1])) > min_abs_cos) {
            return b;
        }
    }
}

inline std::vector<double> random_losses(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> loss(0.1, 2.0);
    std::vector<double> out(n);
    for (auto& x : out) {
        x = loss(rng);
    }
    return out;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double five_point_difference(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

inline double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Largest coordinate difference divided by the largest coordinate magnitude.
inline double scaled_max_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

inline double policy_total(const GradientBundle& bundle, std::span<const double> guide,
                           const policy::PolicyState& p) {
    return policy::policy_loss(policy::intervene(bundle, p), bundle, guide, p).total;
}

/// Central-difference d(total)/d(tau) entry by entry; diagonal entries of a
/// matrix policy are left at zero.
inline std::vector<double> policy_grad_fd(const GradientBundle& bundle, std::span<const double> guide,
                                          const policy::PolicyState& p, double h) {
    std::vector<double> out(p.tau.size(), 0.0);
    for (std::size_t e = 0; e < p.tau.size(); ++e) {
        if (p.mode == policy::Mode::Matrix && e / p.n_tasks == e % p.n_tasks) {
            continue;
        }
        auto f = [&](double t) {
            policy::PolicyState q = p;
            q.tau[e] = t;
            return policy_total(bundle, guide, q);
        };
        out[e] = central_difference(f, p.tau[e], h);
    }
    return out;
}

} // namespace aim::testing
