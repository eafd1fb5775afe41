#include "aim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aim/errors.hpp"
#include "aim/simd/kernels.hpp"

namespace aim::optim {

bool adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::span<double> delta) {
    if (params.size() != grad.size() || (!delta.empty() && delta.size() != params.size())) {
        throw DimensionError("adam_step: parameter/gradient size mismatch");
    }
    if (!all_finite(grad)) {
        ++state.skipped_steps;
        return false;
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const simd::AdamCoeffs coeffs{
        .beta1 = state.beta1,
        .beta2 = state.beta2,
        .eps = state.eps,
        .step_size = state.lr / (1.0 - std::pow(state.beta1, t)),
        .inv_bias2 = 1.0 / (1.0 - std::pow(state.beta2, t)),
    };
    simd::active().adam(coeffs, params.data(), grad.data(), state.m.data(), state.v.data(),
                        delta.empty() ? nullptr : delta.data(), params.size());
    return true;
}

bool sgd_step(double lr, std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) {
        throw DimensionError("sgd_step: parameter/gradient size mismatch");
    }
    if (!all_finite(grad)) {
        return false;
    }
    simd::active().axpy(-lr, grad.data(), params.data(), params.size());
    return true;
}

double plateau_step(PlateauSchedulerState& state, double metric) {
    if (metric < state.best_metric - state.threshold) {
        state.best_metric = metric;
        state.epochs_since_improve = 0;
    } else {
        ++state.epochs_since_improve;
    }
    if (state.epochs_since_improve > state.patience) {
        state.current_lr = std::max(state.current_lr * state.factor, state.min_lr);
        state.epochs_since_improve = 0;
    }
    return state.current_lr;
}

CosineRestartState make_cosine_restart(double eta_max, int t0, int t_mult, double eta_min) {
    if (t0 < 1 || t_mult < 1 || eta_min > eta_max) {
        throw ConfigError("cosine restart: need t0 >= 1, t_mult >= 1, eta_min <= eta_max");
    }
    return CosineRestartState{t0, t_mult, eta_min, eta_max, 0, t0};
}

double cosine_restart_lr(const CosineRestartState& state) {
    const double phase = std::numbers::pi * static_cast<double>(state.epoch_in_cycle) /
                         static_cast<double>(state.cycle_length);
    return state.eta_min + 0.5 * (state.eta_max - state.eta_min) * (1.0 + std::cos(phase));
}

bool cosine_restart_advance(CosineRestartState& state) {
    ++state.epoch_in_cycle;
    if (state.epoch_in_cycle >= state.cycle_length) {
        state.epoch_in_cycle = 0;
        state.cycle_length *= state.t_mult;
        return true;
    }
    return false;
}

} // namespace aim::optim
