#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "aim/aim_policy.hpp"

namespace aim {

enum class Method { Ls, Pcgrad, AimScalar, AimMatrix };

std::string_view method_name(Method m);

/// Parses "ls", "pcgrad", "aim_scalar", "aim_matrix"; throws ConfigError
/// listing the valid names otherwise.
Method parse_method(std::string_view s);

/// Comma-separated list of valid method names.
std::string valid_method_names();

bool is_aim(Method m);

policy::Mode policy_mode(Method m);

struct CombineOutcome {
    ParamVector applied;
    std::optional<policy::InterventionResult> intervention;
    std::optional<policy::PolicyLossBreakdown> policy_loss;
    std::vector<double> policy_grad;
    bool policy_updated = false;
};

/// Turns a gradient bundle into the update direction for the main model.
/// For AIM methods this also computes the policy loss on guide_losses and
/// steps the policy (before the caller steps the main model). A
/// policy_lr of 0 leaves the policy frozen.
CombineOutcome combine_step(Method method, const GradientBundle& bundle,
                            std::span<const double> guide_losses, policy::PolicyState* policy,
                            double policy_lr);

} // namespace aim
