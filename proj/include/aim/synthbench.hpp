#pragma once
// Synthetic multi-task regression with a controllable angle between task
// weight vectors, and a one-hidden-layer tanh network with per-task linear
// heads whose per-task gradients are computed by hand.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "aim/aim_policy.hpp"

namespace aim::synth {

struct SyntheticSpec {
    int n_tasks = 4;
    int input_dim = 8;
    int n_train = 5000;
    int n_val = 500;
    int n_test = 1000;
    double conflict_angle = 120.0;  // degrees between every pair of task weights
    double noise_std = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
    int total() const { return n_train + n_val + n_test; }
};

/// Samples are stored as train | validation | test, in that order.
struct Dataset {
    int input_dim = 0;
    int n_tasks = 0;
    std::vector<double> x;   // size() x input_dim, row-major
    std::vector<double> y;   // size() x n_tasks, row-major
    std::vector<ParamVector> task_weights;

    std::size_t size() const { return input_dim == 0 ? 0 : x.size() / static_cast<std::size_t>(input_dim); }
    std::span<const double> input(std::size_t i) const {
        return {x.data() + i * static_cast<std::size_t>(input_dim), static_cast<std::size_t>(input_dim)};
    }
    double target(std::size_t i, int task) const { return y[i * static_cast<std::size_t>(n_tasks) + static_cast<std::size_t>(task)]; }
};

/// Unit-norm weight vectors in R^input_dim with pairwise cosine
/// cos(angle). Throws ConfigError when no such arrangement exists (the
/// equicorrelation Gram matrix is indefinite or its rank exceeds input_dim).
std::vector<ParamVector> task_weight_vectors(int n_tasks, int input_dim, double angle_deg,
                                             std::uint64_t seed);

Dataset generate(const SyntheticSpec& spec);

std::vector<std::size_t> train_indices(const SyntheticSpec& spec);
std::vector<std::size_t> validation_indices(const SyntheticSpec& spec);
std::vector<std::size_t> test_indices(const SyntheticSpec& spec);

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, int n_tasks);

struct MlpLayout {
    int input_dim = 0;
    int hidden = 32;
    int n_tasks = 0;

    std::size_t w1() const { return 0; }  // hidden x input_dim
    std::size_t b1() const { return static_cast<std::size_t>(hidden * input_dim); }
    std::size_t head_w(int t) const { return b1() + static_cast<std::size_t>(hidden + t * (hidden + 1)); }
    std::size_t head_b(int t) const { return head_w(t) + static_cast<std::size_t>(hidden); }
    std::size_t size() const { return b1() + static_cast<std::size_t>(hidden + n_tasks * (hidden + 1)); }
};

struct MlpModel {
    MlpLayout layout;
    ParamVector params;
    // Dataset target column predicted by each head.
    std::vector<int> target_columns;
};

/// Glorot-uniform weights, zero biases. target_columns defaults to
/// 0..n_tasks-1.
MlpModel make_mlp(int input_dim, int n_tasks, std::uint64_t seed, int hidden = 32,
                  std::vector<int> target_columns = {});

/// Per-task mean squared error over the batch and its gradient with respect
/// to every parameter.
GradientBundle mlp_task_grads(const MlpModel& model, const Dataset& data,
                              std::span<const std::size_t> batch);

std::vector<double> mlp_task_losses(const MlpModel& model, const Dataset& data,
                                    std::span<const std::size_t> batch);

std::vector<double> mlp_task_mae(const MlpModel& model, const Dataset& data,
                                 std::span<const std::size_t> indices);

struct GuidanceSplit {
    std::vector<std::size_t> guidance;
    std::vector<std::size_t> primary;
};

/// Seeded permutation of 0..n-1; the first round(fraction * n) entries form
/// the guidance set and the rest the primary set.
GuidanceSplit split_guidance(std::size_t n, double fraction, std::uint64_t seed);

struct DatasetSplit {
    std::vector<std::size_t> primary_train;
    std::vector<std::size_t> guidance;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Carves a guidance set out of train (by position) and keeps validation and
/// test as given.
DatasetSplit make_split(std::span<const std::size_t> train, std::vector<std::size_t> validation,
                        std::vector<std::size_t> test, double guidance_fraction, std::uint64_t seed);

/// Fisher-Yates shuffle with a portable bounded draw, so the permutation
/// depends only on the generator state.
void shuffle_indices(std::span<std::size_t> items, std::mt19937_64& rng);

} // namespace aim::synth
