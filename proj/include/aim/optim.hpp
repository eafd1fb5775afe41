#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include "aim/vecmath.hpp"

namespace aim::optim {

/// Bias-corrected Adam. Moments are sized lazily on the first step.
struct AdamState {
    ParamVector m;
    ParamVector v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 1e-3;
    std::int64_t skipped_steps = 0;
};

/// One Adam step on params. Returns false and leaves params and moments
/// untouched when grad contains a non-finite entry (counted in
/// state.skipped_steps). When delta is non-empty it receives the amount
/// subtracted from each parameter, so params_before - delta == params_after
/// bitwise.
bool adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::span<double> delta = {});

/// Plain gradient descent: params -= lr * grad. Same skip rule as adam_step.
bool sgd_step(double lr, std::span<double> params, std::span<const double> grad);

/// Reduce-on-plateau learning-rate schedule driven by a lower-is-better
/// metric.
struct PlateauSchedulerState {
    double best_metric = std::numeric_limits<double>::infinity();
    int epochs_since_improve = 0;
    int patience = 10;
    double factor = 0.5;
    double current_lr = 1e-3;
    double min_lr = 0.0;
    double threshold = 1e-8;
};

double plateau_step(PlateauSchedulerState& state, double metric);

/// Cosine annealing with warm restarts, advanced once per epoch.
struct CosineRestartState {
    int t0 = 20;
    int t_mult = 1;
    double eta_min = 1e-6;
    double eta_max = 5e-4;
    int epoch_in_cycle = 0;
    int cycle_length = 20;
};

CosineRestartState make_cosine_restart(double eta_max, int t0 = 20, int t_mult = 1,
                                       double eta_min = 1e-6);

double cosine_restart_lr(const CosineRestartState& state);

/// Moves to the next epoch; returns true when a new cycle starts.
bool cosine_restart_advance(CosineRestartState& state);

} // namespace aim::optim
