#include "aim/metrics.hpp"

#include <cmath>

#include "aim/errors.hpp"

namespace aim::metrics {

double delta_m(std::span<const double> method_mae, std::span<const double> stl_mae) {
    if (method_mae.size() != stl_mae.size() || stl_mae.empty()) {
        throw DimensionError("delta_m: method and reference errors must have equal, non-zero length");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < stl_mae.size(); ++i) {
        if (!(stl_mae[i] > 0.0)) {
            throw ConfigError("delta_m: reference errors must be positive");
        }
        acc += (method_mae[i] - stl_mae[i]) / stl_mae[i];
    }
    return 100.0 * acc / static_cast<double>(stl_mae.size());
}

std::vector<double> mean_rank(const std::vector<std::vector<double>>& mae_table) {
    const std::size_t methods = mae_table.size();
    if (methods == 0) {
        return {};
    }
    const std::size_t tasks = mae_table.front().size();
    for (const auto& row : mae_table) {
        if (row.size() != tasks) {
            throw DimensionError("mean_rank: ragged table");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw ConfigError("mean_rank: table entries must be finite");
            }
        }
    }
    std::vector<double> out(methods, 0.0);
    for (std::size_t t = 0; t < tasks; ++t) {
        for (std::size_t m = 0; m < methods; ++m) {
            const double v = mae_table[m][t];
            std::size_t below = 0;
            std::size_t equal = 0;
            for (std::size_t o = 0; o < methods; ++o) {
                below += mae_table[o][t] < v ? 1 : 0;
                equal += mae_table[o][t] == v ? 1 : 0;
            }
            // Tied block occupies ranks below+1 .. below+equal.
            out[m] += static_cast<double>(below) + static_cast<double>(equal + 1) / 2.0;
        }
    }
    for (auto& r : out) {
        r /= static_cast<double>(tasks);
    }
    return out;
}

EarlyStopDecision early_stop_check(std::span<const double> val_history, int patience) {
    if (val_history.empty()) {
        throw ConfigError("early_stop_check: empty history");
    }
    EarlyStopDecision d;
    double best = val_history.front();
    d.best_epoch = 1;
    for (std::size_t e = 1; e < val_history.size(); ++e) {
        if (val_history[e] < best - kImprovementThreshold) {
            best = val_history[e];
            d.best_epoch = e + 1;
        }
    }
    d.stop = val_history.size() - d.best_epoch >= static_cast<std::size_t>(patience);
    return d;
}

} // namespace aim::metrics
