#pragma once
// Learned gradient intervention: each task gradient sheds a sigmoid-gated
// share of its projection onto every other task gradient, and the gate
// thresholds are trained against a guidance objective.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aim/optim.hpp"
#include "aim/pair_matrix.hpp"
#include "aim/vecmath.hpp"

namespace aim {

/// Per-task gradients and losses from one batch.
struct GradientBundle {
    std::vector<ParamVector> grads;
    std::vector<double> losses;

    std::size_t n_tasks() const { return grads.size(); }
    std::size_t dim() const { return grads.empty() ? 0 : grads.front().size(); }

    /// Throws ConfigError/DimensionError when the bundle is malformed.
    void validate() const;
};

namespace policy {

enum class Mode { Scalar, Matrix };
enum class Optimizer { Adam, Sgd };

struct PolicyState {
    Mode mode = Mode::Scalar;
    std::size_t n_tasks = 1;
    // One entry in Scalar mode, n_tasks^2 row-major in Matrix mode. The
    // diagonal is carried for shape only and never gated or trained.
    std::vector<double> tau;
    double temperature_k = 10.0;
    double lambda_g = 1.0;
    double lambda_m = 0.01;
    double lambda_p = 0.08;
    Optimizer optimizer = Optimizer::Adam;
    optim::AdamState adam;
    std::int64_t skipped_steps = 0;

    double threshold(std::size_t i, std::size_t j) const {
        return mode == Mode::Scalar ? tau.front() : tau[i * n_tasks + j];
    }

    /// Validates invariants (k > 0, lambdas >= 0, tau shape).
    void validate() const;
};

PolicyState make_policy(Mode mode, std::size_t n_tasks, double tau_init = 0.0);

/// tau as an N x N matrix (scalar mode broadcasts).
PairMatrix tau_matrix(const PolicyState& policy);

struct InterventionResult {
    ParamVector g_intervened;
    std::vector<ParamVector> modified_grads;
    PairMatrix cos_matrix;
    PairMatrix weight_matrix;
};

struct PolicyLossBreakdown {
    double guide = 0.0;
    double magnitude = 0.0;
    double progress = 0.0;
    double total = 0.0;
    bool uniform_alpha_fallback = false;
};

/// Logistic gate sigma(k * (tau - cos)).
double projection_weight(double cos_ij, double tau_ij, double k);

InterventionResult intervene(const GradientBundle& bundle, const PolicyState& policy);

PolicyLossBreakdown policy_loss(const InterventionResult& result, const GradientBundle& bundle,
                                std::span<const double> guide_losses, const PolicyState& policy);

/// Analytic d(total policy loss)/d(tau), same shape as policy.tau. The raw
/// gradients are constants and the guidance term does not depend on tau.
std::vector<double> policy_grad(const InterventionResult& result, const GradientBundle& bundle,
                                std::span<const double> guide_losses, const PolicyState& policy);

std::vector<double> policy_grad(const GradientBundle& bundle, std::span<const double> guide_losses,
                                const PolicyState& policy);

/// One optimizer step on tau. Returns false (and counts a skipped step) when
/// grad is non-finite.
bool policy_step(PolicyState& policy, std::span<const double> grad, double lr);

/// Loss-share weights L_i / sum L_j, uniform when the sum is not positive.
std::vector<double> loss_shares(std::span<const double> losses, bool* used_fallback = nullptr);

} // namespace policy
} // namespace aim
