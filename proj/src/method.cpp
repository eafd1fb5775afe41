#include "aim/method.hpp"

#include "aim/baselines.hpp"
#include "aim/errors.hpp"

namespace aim {

std::string_view method_name(Method m) {
    switch (m) {
    case Method::Ls:
        return "ls";
    case Method::Pcgrad:
        return "pcgrad";
    case Method::AimScalar:
        return "aim_scalar";
    case Method::AimMatrix:
        return "aim_matrix";
    }
    return "unknown";
}

std::string valid_method_names() {
    return "ls, pcgrad, aim_scalar, aim_matrix";
}

Method parse_method(std::string_view s) {
    for (Method m : {Method::Ls, Method::Pcgrad, Method::AimScalar, Method::AimMatrix}) {
        if (s == method_name(m)) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + std::string(s) + "' (valid: " + valid_method_names() + ")");
}

bool is_aim(Method m) {
    return m == Method::AimScalar || m == Method::AimMatrix;
}

policy::Mode policy_mode(Method m) {
    return m == Method::AimMatrix ? policy::Mode::Matrix : policy::Mode::Scalar;
}

CombineOutcome combine_step(Method method, const GradientBundle& bundle,
                            std::span<const double> guide_losses, policy::PolicyState* policy,
                            double policy_lr) {
    CombineOutcome out;
    switch (method) {
    case Method::Ls:
        out.applied = baselines::ls_combine(bundle);
        return out;
    case Method::Pcgrad:
        out.applied = baselines::pcgrad_combine(bundle);
        return out;
    case Method::AimScalar:
    case Method::AimMatrix:
        break;
    }
    if (policy == nullptr) {
        throw ConfigError("AIM step requires a policy state");
    }
    auto result = policy::intervene(bundle, *policy);
    out.policy_loss = policy::policy_loss(result, bundle, guide_losses, *policy);
    out.policy_grad = policy::policy_grad(result, bundle, guide_losses, *policy);
    if (policy_lr > 0.0) {
        out.policy_updated = policy::policy_step(*policy, out.policy_grad, policy_lr);
    }
    out.applied = result.g_intervened;
    out.intervention = std::move(result);
    return out;
}

} // namespace aim
