#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aim::metrics {

/// Mean percentage change of per-task error relative to single-task
/// reference errors, (100/N) * sum (m_i - s_i) / s_i. Lower is better.
double delta_m(std::span<const double> method_mae, std::span<const double> stl_mae);

/// Mean rank per method (rows) over tasks (columns), ranking ascending by
/// error with ties sharing their average rank.
std::vector<double> mean_rank(const std::vector<std::vector<double>>& mae_table);

struct EarlyStopDecision {
    bool stop = false;
    std::size_t best_epoch = 0;  // 1-based
};

/// Stop once the best loss has gone `patience` epochs without improving by
/// more than 1e-8.
EarlyStopDecision early_stop_check(std::span<const double> val_history, int patience);

inline constexpr double kImprovementThreshold = 1e-8;

} // namespace aim::metrics
