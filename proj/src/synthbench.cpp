#include "aim/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "aim/errors.hpp"
#include "aim/simd/kernels.hpp"

namespace aim::synth {

void SyntheticSpec::validate() const {
    if (n_tasks < 2) {
        throw ConfigError("synthetic spec needs at least 2 tasks");
    }
    if (input_dim < 1 || n_train < 1 || n_val < 1 || n_test < 1) {
        throw ConfigError("synthetic spec counts must all be >= 1");
    }
    if (!(conflict_angle >= 0.0 && conflict_angle <= 180.0)) {
        throw ConfigError("conflict_angle must lie in [0, 180] degrees");
    }
    if (!(noise_std >= 0.0)) {
        throw ConfigError("noise_std must be non-negative");
    }
}

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    // Rejection sampling on the top of the range removes modulo bias.
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t r = rng();
    while (r >= limit) {
        r = rng();
    }
    return r % bound;
}

constexpr std::uint64_t kBasisSalt = 0x9e3779b97f4a7c15ULL;

} // namespace

void shuffle_indices(std::span<std::size_t> items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<ParamVector> task_weight_vectors(int n_tasks, int input_dim, double angle_deg,
                                             std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(n_tasks);
    const auto d = static_cast<std::size_t>(input_dim);
    const double c = std::cos(angle_deg * std::numbers::pi / 180.0);
    const double min_eig = std::min(1.0 - c, 1.0 + (n_tasks - 1) * c);
    if (min_eig < -1e-12) {
        const double max_angle = std::acos(-1.0 / (n_tasks - 1)) * 180.0 / std::numbers::pi;
        throw ConfigError(std::to_string(n_tasks) + " tasks cannot be pairwise " +
                          std::to_string(angle_deg) + " degrees apart (maximum " +
                          std::to_string(max_angle) + ")");
    }

    // Semidefinite Cholesky of the equicorrelation Gram matrix; zero pivots
    // drop a column.
    std::vector<double> chol(n * n, 0.0);
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = 1.0;
        for (std::size_t k = 0; k < j; ++k) {
            diag -= chol[j * n + k] * chol[j * n + k];
        }
        if (diag <= 1e-12) {
            continue;
        }
        ++rank;
        const double pivot = std::sqrt(diag);
        chol[j * n + j] = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = c;
            for (std::size_t k = 0; k < j; ++k) {
                s -= chol[i * n + k] * chol[j * n + k];
            }
            chol[i * n + j] = s / pivot;
        }
    }
    if (rank > d) {
        throw ConfigError("task weight Gram matrix has rank " + std::to_string(rank) +
                          " but input_dim is " + std::to_string(input_dim));
    }

    // Random orthonormal directions, one per Cholesky column that is used.
    std::mt19937_64 rng(seed ^ kBasisSalt);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<ParamVector> basis;
    for (std::size_t k = 0; k < n; ++k) {
        bool used = false;
        for (std::size_t i = 0; i < n; ++i) {
            used = used || chol[i * n + k] != 0.0;
        }
        if (!used) {
            basis.emplace_back(d, 0.0);
            continue;
        }
        ParamVector q(d);
        double q_norm = 0.0;
        while (q_norm < 1e-6) {
            for (auto& v : q) {
                v = normal(rng);
            }
            for (const auto& b : basis) {
                axpy(-dot(q, b), b, q);
            }
            q_norm = norm(q);
        }
        for (auto& v : q) {
            v /= q_norm;
        }
        basis.push_back(std::move(q));
    }

    std::vector<ParamVector> weights(n, ParamVector(d, 0.0));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k <= t; ++k) {
            if (chol[t * n + k] != 0.0) {
                axpy(chol[t * n + k], basis[k], weights[t]);
            }
        }
    }
    return weights;
}

Dataset generate(const SyntheticSpec& spec) {
    spec.validate();
    Dataset data;
    data.input_dim = spec.input_dim;
    data.n_tasks = spec.n_tasks;
    data.task_weights = task_weight_vectors(spec.n_tasks, spec.input_dim, spec.conflict_angle, spec.seed);

    const auto total = static_cast<std::size_t>(spec.total());
    const auto d = static_cast<std::size_t>(spec.input_dim);
    const auto tasks = static_cast<std::size_t>(spec.n_tasks);
    data.x.resize(total * d);
    data.y.resize(total * tasks);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            data.x[i * d + k] = normal(rng);
        }
        for (std::size_t t = 0; t < tasks; ++t) {
            data.y[i * tasks + t] = dot(data.task_weights[t], data.input(i)) + spec.noise_std * normal(rng);
        }
    }
    return data;
}

namespace {

std::vector<std::size_t> iota_range(std::size_t begin, std::size_t count) {
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = begin + i;
    }
    return out;
}

} // namespace

std::vector<std::size_t> train_indices(const SyntheticSpec& spec) {
    return iota_range(0, static_cast<std::size_t>(spec.n_train));
}

std::vector<std::size_t> validation_indices(const SyntheticSpec& spec) {
    return iota_range(static_cast<std::size_t>(spec.n_train), static_cast<std::size_t>(spec.n_val));
}

std::vector<std::size_t> test_indices(const SyntheticSpec& spec) {
    return iota_range(static_cast<std::size_t>(spec.n_train + spec.n_val),
                      static_cast<std::size_t>(spec.n_test));
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (int k = 0; k < data.input_dim; ++k) {
        out << (k == 0 ? "" : ",") << "x_" << k;
    }
    for (int t = 0; t < data.n_tasks; ++t) {
        out << ",y_" << t;
    }
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.input(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", row[k]);
            out << (k == 0 ? "" : ",") << buf;
        }
        for (int t = 0; t < data.n_tasks; ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", data.target(i, t));
            out << ',' << buf;
        }
        out << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path, int n_tasks) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path.string() + ": missing header");
    }
    const auto columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns <= n_tasks) {
        throw ConfigError(path.string() + ": header has too few columns");
    }
    Dataset data;
    data.n_tasks = n_tasks;
    data.input_dim = columns - n_tasks;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            const double v = std::stod(cell);
            (col < data.input_dim ? data.x : data.y).push_back(v);
            ++col;
        }
        if (col != columns) {
            throw ConfigError(path.string() + ": ragged row");
        }
    }
    return data;
}

MlpModel make_mlp(int input_dim, int n_tasks, std::uint64_t seed, int hidden,
                  std::vector<int> target_columns) {
    if (input_dim < 1 || n_tasks < 1 || hidden < 1) {
        throw ConfigError("mlp dimensions must be positive");
    }
    MlpModel model;
    model.layout = MlpLayout{input_dim, hidden, n_tasks};
    model.params.assign(model.layout.size(), 0.0);
    if (target_columns.empty()) {
        for (int t = 0; t < n_tasks; ++t) {
            target_columns.push_back(t);
        }
    }
    if (static_cast<int>(target_columns.size()) != n_tasks) {
        throw ConfigError("mlp target column map does not match head count");
    }
    model.target_columns = std::move(target_columns);

    std::mt19937_64 rng(seed);
    const double trunk_bound = std::sqrt(6.0 / (input_dim + hidden));
    std::uniform_real_distribution<double> trunk(-trunk_bound, trunk_bound);
    for (std::size_t i = 0; i < model.layout.b1(); ++i) {
        model.params[i] = trunk(rng);
    }
    const double head_bound = std::sqrt(6.0 / (hidden + 1));
    std::uniform_real_distribution<double> head(-head_bound, head_bound);
    for (int t = 0; t < n_tasks; ++t) {
        for (int r = 0; r < hidden; ++r) {
            model.params[model.layout.head_w(t) + static_cast<std::size_t>(r)] = head(rng);
        }
    }
    return model;
}

namespace {

// Hidden activations for one sample.
void forward_hidden(const MlpModel& model, std::span<const double> x, std::span<double> h) {
    const auto& k = simd::active();
    const auto& L = model.layout;
    const auto d = static_cast<std::size_t>(L.input_dim);
    for (int r = 0; r < L.hidden; ++r) {
        const double z = k.dot(model.params.data() + L.w1() + static_cast<std::size_t>(r) * d, x.data(), d) +
                         model.params[L.b1() + static_cast<std::size_t>(r)];
        h[static_cast<std::size_t>(r)] = std::tanh(z);
    }
}

double head_output(const MlpModel& model, std::span<const double> h, int t) {
    const auto& L = model.layout;
    return simd::active().dot(model.params.data() + L.head_w(t), h.data(), h.size()) +
           model.params[L.head_b(t)];
}

void check_batch(const MlpModel& model, const Dataset& data, std::span<const std::size_t> batch) {
    if (batch.empty()) {
        throw ConfigError("batch must be non-empty");
    }
    if (model.layout.input_dim != data.input_dim) {
        throw DimensionError("model input_dim does not match dataset");
    }
    for (int col : model.target_columns) {
        if (col < 0 || col >= data.n_tasks) {
            throw ConfigError("model head targets a missing dataset column");
        }
    }
}

} // namespace

GradientBundle mlp_task_grads(const MlpModel& model, const Dataset& data,
                              std::span<const std::size_t> batch) {
    check_batch(model, data, batch);
    const auto& k = simd::active();
    const auto& L = model.layout;
    const auto hidden = static_cast<std::size_t>(L.hidden);
    const auto d = static_cast<std::size_t>(L.input_dim);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    GradientBundle bundle;
    bundle.grads.assign(static_cast<std::size_t>(L.n_tasks), ParamVector(L.size(), 0.0));
    bundle.losses.assign(static_cast<std::size_t>(L.n_tasks), 0.0);

    std::vector<double> h(hidden);
    std::vector<double> dz(hidden);
    for (std::size_t idx : batch) {
        const auto x = data.input(idx);
        forward_hidden(model, x, h);
        for (int t = 0; t < L.n_tasks; ++t) {
            const double residual = head_output(model, h, t) - data.target(idx, model.target_columns[static_cast<std::size_t>(t)]);
            bundle.losses[static_cast<std::size_t>(t)] += residual * residual * inv_batch;

            auto& g = bundle.grads[static_cast<std::size_t>(t)];
            const double delta = 2.0 * residual * inv_batch;
            k.axpy(delta, h.data(), g.data() + L.head_w(t), hidden);
            g[L.head_b(t)] += delta;

            const double* head = model.params.data() + L.head_w(t);
            for (std::size_t r = 0; r < hidden; ++r) {
                dz[r] = delta * head[r] * (1.0 - h[r] * h[r]);
            }
            for (std::size_t r = 0; r < hidden; ++r) {
                k.axpy(dz[r], x.data(), g.data() + L.w1() + r * d, d);
            }
            k.axpy(1.0, dz.data(), g.data() + L.b1(), hidden);
        }
    }
    return bundle;
}

std::vector<double> mlp_task_losses(const MlpModel& model, const Dataset& data,
                                    std::span<const std::size_t> batch) {
    check_batch(model, data, batch);
    const auto& L = model.layout;
    std::vector<double> losses(static_cast<std::size_t>(L.n_tasks), 0.0);
    std::vector<double> h(static_cast<std::size_t>(L.hidden));
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (std::size_t idx : batch) {
        forward_hidden(model, data.input(idx), h);
        for (int t = 0; t < L.n_tasks; ++t) {
            const double residual = head_output(model, h, t) - data.target(idx, model.target_columns[static_cast<std::size_t>(t)]);
            losses[static_cast<std::size_t>(t)] += residual * residual * inv_batch;
        }
    }
    return losses;
}

std::vector<double> mlp_task_mae(const MlpModel& model, const Dataset& data,
                                 std::span<const std::size_t> indices) {
    check_batch(model, data, indices);
    const auto& L = model.layout;
    std::vector<double> mae(static_cast<std::size_t>(L.n_tasks), 0.0);
    std::vector<double> h(static_cast<std::size_t>(L.hidden));
    for (std::size_t idx : indices) {
        forward_hidden(model, data.input(idx), h);
        for (int t = 0; t < L.n_tasks; ++t) {
            mae[static_cast<std::size_t>(t)] += std::abs(head_output(model, h, t) - data.target(idx, model.target_columns[static_cast<std::size_t>(t)]));
        }
    }
    for (auto& m : mae) {
        m /= static_cast<double>(indices.size());
    }
    return mae;
}

GuidanceSplit split_guidance(std::size_t n, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("guidance fraction must lie strictly between 0 and 1");
    }
    const auto n_guide = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_guide == 0) {
        throw ConfigError("guidance fraction " + std::to_string(fraction) + " of " +
                          std::to_string(n) + " samples leaves the guidance set empty");
    }
    if (n_guide >= n) {
        throw ConfigError("guidance set would consume the whole training set");
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    std::mt19937_64 rng(seed);
    shuffle_indices(perm, rng);
    GuidanceSplit split;
    split.guidance.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_guide));
    split.primary.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_guide), perm.end());
    return split;
}

DatasetSplit make_split(std::span<const std::size_t> train, std::vector<std::size_t> validation,
                        std::vector<std::size_t> test, double guidance_fraction, std::uint64_t seed) {
    const GuidanceSplit local = split_guidance(train.size(), guidance_fraction, seed);
    DatasetSplit out;
    out.guidance.reserve(local.guidance.size());
    for (std::size_t i : local.guidance) {
        out.guidance.push_back(train[i]);
    }
    out.primary_train.reserve(local.primary.size());
    for (std::size_t i : local.primary) {
        out.primary_train.push_back(train[i]);
    }
    out.validation = std::move(validation);
    out.test = std::move(test);
    return out;
}

} // namespace aim::synth
