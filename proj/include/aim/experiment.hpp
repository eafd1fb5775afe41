#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aim/method.hpp"
#include "aim/synthbench.hpp"
#include "aim/trainer.hpp"

namespace aim::experiment {

struct SynthExperiment {
    synth::SyntheticSpec spec;
    train::TrainConfig base;    // method field is ignored
    std::vector<int> sizes;     // training-subset sizes, each <= spec.n_train
    std::vector<Method> methods;
    int seeds = 3;              // training seeds base.seed, base.seed + 1, ...
    int jobs = 1;

    void validate() const;
};

struct SummaryRow {
    Method method;
    int size = 0;
    std::vector<double> delta_m;  // one per seed
    double delta_m_mean = 0.0;
    double delta_m_std = 0.0;     // sample standard deviation
    double mean_rank = 0.0;       // over tasks, from seed-averaged MAE
    std::vector<double> mean_mae; // seed-averaged per-task MAE
};

struct RunKey {
    Method method;
    int size;
    int seed_index;
};

struct SynthResult {
    std::vector<std::vector<double>> stl_mae;  // [seed][task]
    std::vector<SummaryRow> rows;              // methods-major within each size
    std::vector<std::pair<RunKey, train::RunRecord>> runs;
};

/// Generates the dataset once (fixed validation and test splits), trains
/// the single-task references on the full training set for every seed,
/// then every method on the first `size` training samples. When out_dir is
/// set, each run is persisted as a run-record directory.
SynthResult run_synth_experiment(const SynthExperiment& exp,
                                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string summary_csv(const SynthResult& result);

} // namespace aim::experiment
