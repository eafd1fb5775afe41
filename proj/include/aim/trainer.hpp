#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aim/aim_policy.hpp"
#include "aim/method.hpp"
#include "aim/optim.hpp"
#include "aim/pair_matrix.hpp"
#include "aim/synthbench.hpp"

namespace aim::train {

struct TrainConfig {
    Method method = Method::AimMatrix;
    int epochs = 300;
    int patience = 75;
    int batch_size = 64;
    double main_lr = 1e-3;
    double policy_lr = 5e-4;
    double guidance_fraction = 0.1;
    std::uint64_t seed = 0;
    double lambda_g = 1.0;
    double lambda_m = 0.01;
    double lambda_p = 0.08;
    double temperature_k = 10.0;
    double tau_init = 0.0;
    // Main-model reduce-on-plateau schedule.
    int plateau_patience = 10;
    double plateau_factor = 0.5;
    double plateau_min_lr = 1e-6;
    // Policy cosine warm-restart schedule.
    int cosine_t0 = 20;
    int cosine_t_mult = 1;
    double cosine_eta_min = 1e-6;
    int diag_every = 10;

    void validate() const;
};

struct DiagnosticsFrame {
    int epoch = 0;
    PairMatrix tau;
    PairMatrix mean_cos;
    PairMatrix conflict_rate;
    PairMatrix mean_weight;
};

/// Aggregates the per-step intervention matrices of a window. Conflict rate
/// is the fraction of steps with cos < 0, independent of tau.
DiagnosticsFrame record_diagnostics(std::span<const policy::InterventionResult> window,
                                    const policy::PolicyState& policy, int epoch);

struct RunRecord {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> lr_main;
    std::vector<double> lr_policy;
    std::vector<double> test_mae;
    std::vector<DiagnosticsFrame> diagnostics;
    std::vector<std::size_t> test_indices;
    std::vector<double> final_tau;
    int best_epoch = 0;
    double wall_clock_seconds = 0.0;
    std::uint64_t seed = 0;
    std::int64_t skipped_policy_steps = 0;
    std::int64_t skipped_main_steps = 0;
};

/// Everything an observer can see about one optimizer step.
struct StepInfo {
    int epoch;
    std::span<const std::size_t> primary_batch;
    std::span<const std::size_t> guidance_batch;
    const GradientBundle& bundle;
    const CombineOutcome& outcome;
};

using StepObserver = std::function<void(const StepInfo&)>;

/// Trains a shared-trunk MLP with the configured combiner. AIM methods carve
/// a guidance set out of `train`; baselines train on all of it. Test MAE is
/// computed once, on the parameters of the best validation epoch.
RunRecord train_model(const synth::Dataset& data, std::span<const std::size_t> train,
                      std::span<const std::size_t> validation, std::span<const std::size_t> test,
                      const TrainConfig& config, const StepObserver& observer = {},
                      std::vector<int> target_columns = {});

/// Single-task reference: one single-head model per task, trained with
/// linear scalarization on the full training set. Returns per-task test MAE.
std::vector<double> train_stl_references(const synth::Dataset& data, std::span<const std::size_t> train,
                                         std::span<const std::size_t> validation,
                                         std::span<const std::size_t> test, const TrainConfig& config);

} // namespace aim::train
