#include "aim/aim_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aim/errors.hpp"

namespace aim {

void GradientBundle::validate() const {
    if (grads.empty()) {
        throw ConfigError("gradient bundle needs at least one task");
    }
    if (losses.size() != grads.size()) {
        throw ConfigError("gradient bundle: " + std::to_string(grads.size()) + " gradients but " +
                          std::to_string(losses.size()) + " losses");
    }
    const std::size_t d = grads.front().size();
    for (const auto& g : grads) {
        if (g.size() != d) {
            throw DimensionError("gradient bundle: task gradients differ in length");
        }
    }
}

namespace policy {

namespace {

// Numerically stable logistic function.
double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Gram matrix of the raw task gradients.
PairMatrix gram(const GradientBundle& bundle) {
    const std::size_t n = bundle.n_tasks();
    PairMatrix g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            g(i, j) = dot(bundle.grads[i], bundle.grads[j]);
            g(j, i) = g(i, j);
        }
    }
    return g;
}

// Projection coefficient of g_i on g_j: (g_i.g_j)/|g_j|^2.
double projection_coeff(const PairMatrix& gram, std::size_t i, std::size_t j) {
    const double jj = gram(j, j);
    if (std::sqrt(jj) < kZeroNormThreshold) {
        return 0.0;
    }
    return gram(i, j) / jj;
}

void check_shapes(const GradientBundle& bundle, const PolicyState& policy) {
    bundle.validate();
    policy.validate();
    if (policy.mode == Mode::Matrix && policy.n_tasks != bundle.n_tasks()) {
        throw ConfigError("matrix policy sized for " + std::to_string(policy.n_tasks) +
                          " tasks, bundle has " + std::to_string(bundle.n_tasks()));
    }
}

} // namespace

void PolicyState::validate() const {
    if (!(temperature_k > 0.0)) {
        throw ConfigError("policy temperature k must be positive");
    }
    if (lambda_g < 0.0 || lambda_m < 0.0 || lambda_p < 0.0) {
        throw ConfigError("policy loss weights must be non-negative");
    }
    const std::size_t expected = mode == Mode::Scalar ? 1 : n_tasks * n_tasks;
    if (tau.size() != expected) {
        throw ConfigError("policy tau has " + std::to_string(tau.size()) + " entries, expected " +
                          std::to_string(expected));
    }
}

PolicyState make_policy(Mode mode, std::size_t n_tasks, double tau_init) {
    if (n_tasks == 0) {
        throw ConfigError("policy needs at least one task");
    }
    PolicyState p;
    p.mode = mode;
    p.n_tasks = n_tasks;
    p.tau.assign(mode == Mode::Scalar ? 1 : n_tasks * n_tasks, tau_init);
    return p;
}

PairMatrix tau_matrix(const PolicyState& policy) {
    PairMatrix out(policy.n_tasks);
    for (std::size_t i = 0; i < policy.n_tasks; ++i) {
        for (std::size_t j = 0; j < policy.n_tasks; ++j) {
            out(i, j) = policy.threshold(i, j);
        }
    }
    return out;
}

double projection_weight(double cos_ij, double tau_ij, double k) {
    return logistic(k * (tau_ij - cos_ij));
}

InterventionResult intervene(const GradientBundle& bundle, const PolicyState& policy) {
    check_shapes(bundle, policy);
    const std::size_t n = bundle.n_tasks();
    const PairMatrix g = gram(bundle);

    InterventionResult out;
    out.cos_matrix = PairMatrix(n);
    out.weight_matrix = PairMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ni = std::sqrt(g(i, i));
        for (std::size_t j = 0; j < n; ++j) {
            double c = 1.0;
            if (i != j) {
                const double nj = std::sqrt(g(j, j));
                c = (ni < kZeroNormThreshold || nj < kZeroNormThreshold)
                        ? 0.0
                        : std::clamp(g(i, j) / (ni * nj), -1.0, 1.0);
            }
            out.cos_matrix(i, j) = c;
            out.weight_matrix(i, j) = projection_weight(c, policy.threshold(i, j), policy.temperature_k);
        }
    }

    // Every subtraction uses the original g_i and g_j, so the result does not
    // depend on task order.
    out.modified_grads = bundle.grads;
    out.g_intervened.assign(bundle.dim(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double coeff = out.weight_matrix(i, j) * projection_coeff(g, i, j);
            axpy(-coeff, bundle.grads[j], out.modified_grads[i]);
        }
        axpy(1.0, out.modified_grads[i], out.g_intervened);
    }
    return out;
}

std::vector<double> loss_shares(std::span<const double> losses, bool* used_fallback) {
    const double total = std::accumulate(losses.begin(), losses.end(), 0.0);
    std::vector<double> alpha(losses.size());
    const bool fallback = !(total > 0.0);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        alpha[i] = fallback ? 1.0 / static_cast<double>(losses.size()) : losses[i] / total;
    }
    if (used_fallback != nullptr) {
        *used_fallback = fallback;
    }
    return alpha;
}

PolicyLossBreakdown policy_loss(const InterventionResult& result, const GradientBundle& bundle,
                                std::span<const double> guide_losses, const PolicyState& policy) {
    bundle.validate();
    if (guide_losses.size() != bundle.n_tasks()) {
        throw ConfigError("policy_loss: guidance losses do not match task count");
    }
    PolicyLossBreakdown out;
    out.guide = std::accumulate(guide_losses.begin(), guide_losses.end(), 0.0);

    double norm_sum = 0.0;
    for (const auto& gi : bundle.grads) {
        norm_sum += norm(gi);
    }
    const double gap = norm(result.g_intervened) - norm_sum;
    out.magnitude = gap * gap;

    const std::vector<double> alpha = loss_shares(guide_losses, &out.uniform_alpha_fallback);
    for (std::size_t i = 0; i < bundle.n_tasks(); ++i) {
        out.progress -= alpha[i] * dot(result.g_intervened, bundle.grads[i]);
    }
    out.total = policy.lambda_g * out.guide + policy.lambda_m * out.magnitude +
                policy.lambda_p * out.progress;
    return out;
}

std::vector<double> policy_grad(const InterventionResult& result, const GradientBundle& bundle,
                                std::span<const double> guide_losses, const PolicyState& policy) {
    check_shapes(bundle, policy);
    if (guide_losses.size() != bundle.n_tasks()) {
        throw ConfigError("policy_grad: guidance losses do not match task count");
    }
    const std::size_t n = bundle.n_tasks();
    std::vector<double> grad(policy.tau.size(), 0.0);
    if (n < 2) {
        return grad;
    }

    // Upstream gradient of the loss with respect to g_intervened.
    ParamVector upstream(bundle.dim(), 0.0);
    const double g_norm = norm(result.g_intervened);
    if (g_norm >= kZeroNormThreshold) {
        double norm_sum = 0.0;
        for (const auto& gi : bundle.grads) {
            norm_sum += norm(gi);
        }
        axpy(policy.lambda_m * 2.0 * (g_norm - norm_sum) / g_norm, result.g_intervened, upstream);
    }
    const std::vector<double> alpha = loss_shares(guide_losses);
    for (std::size_t i = 0; i < n; ++i) {
        axpy(-policy.lambda_p * alpha[i], bundle.grads[i], upstream);
    }

    std::vector<double> upstream_dot(n);
    std::vector<double> self_dot(n);
    for (std::size_t j = 0; j < n; ++j) {
        upstream_dot[j] = dot(upstream, bundle.grads[j]);
        self_dot[j] = dot(bundle.grads[j], bundle.grads[j]);
    }

    const double k = policy.temperature_k;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || std::sqrt(self_dot[j]) < kZeroNormThreshold) {
                continue;
            }
            // g_intervened depends on w_ij through -w_ij * c_ij * g_j.
            const double coeff = dot(bundle.grads[i], bundle.grads[j]) / self_dot[j];
            const double d_weight = -coeff * upstream_dot[j];
            const double w = result.weight_matrix(i, j);
            const double d_tau = d_weight * k * w * (1.0 - w);
            if (policy.mode == Mode::Scalar) {
                grad[0] += d_tau;
            } else {
                grad[i * n + j] += d_tau;
            }
        }
    }
    return grad;
}

std::vector<double> policy_grad(const GradientBundle& bundle, std::span<const double> guide_losses,
                                const PolicyState& policy) {
    return policy_grad(intervene(bundle, policy), bundle, guide_losses, policy);
}

bool policy_step(PolicyState& policy, std::span<const double> grad, double lr) {
    if (grad.size() != policy.tau.size()) {
        throw DimensionError("policy_step: gradient shape does not match tau");
    }
    if (!(lr > 0.0)) {
        throw ConfigError("policy_step: learning rate must be positive");
    }
    if (!all_finite(grad)) {
        ++policy.skipped_steps;
        return false;
    }
    if (policy.optimizer == Optimizer::Sgd) {
        return optim::sgd_step(lr, policy.tau, grad);
    }
    policy.adam.lr = lr;
    return optim::adam_step(policy.adam, policy.tau, grad);
}

} // namespace policy
} // namespace aim
