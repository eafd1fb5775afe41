#pragma once

#include <cstdint>
#include <optional>

#include "aim/aim_policy.hpp"

namespace aim::baselines {

/// Linear scalarization with unit weights: sum of task gradients.
ParamVector ls_combine(const GradientBundle& bundle);

/// PCGrad. Each task gradient is projected off every other raw gradient it
/// currently conflicts with (negative dot), using the partially modified
/// gradient at each step. Partners are visited in index order, or in a
/// seeded shuffled order when shuffle_seed is set.
ParamVector pcgrad_combine(const GradientBundle& bundle,
                           std::optional<std::uint64_t> shuffle_seed = std::nullopt);

} // namespace aim::baselines
