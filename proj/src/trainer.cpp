#include "aim/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "aim/errors.hpp"
#include "aim/metrics.hpp"

namespace aim::train {

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("epochs must be >= 1");
    }
    if (patience < 1 || patience > epochs) {
        throw ConfigError("patience must lie in [1, epochs]");
    }
    if (!(guidance_fraction > 0.0 && guidance_fraction < 1.0)) {
        throw ConfigError("guidance_fraction must lie strictly between 0 and 1");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (!(main_lr > 0.0) || !(policy_lr >= 0.0)) {
        throw ConfigError("main_lr must be positive and policy_lr non-negative");
    }
    if (!(temperature_k > 0.0) || lambda_g < 0.0 || lambda_m < 0.0 || lambda_p < 0.0) {
        throw ConfigError("temperature_k must be positive and lambdas non-negative");
    }
    if (plateau_patience < 0 || !(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw ConfigError("plateau scheduler needs patience >= 0 and factor in (0, 1)");
    }
    if (cosine_t0 < 1 || cosine_t_mult < 1 || diag_every < 1) {
        throw ConfigError("cosine_t0, cosine_t_mult and diag_every must be >= 1");
    }
}

DiagnosticsFrame record_diagnostics(std::span<const policy::InterventionResult> window,
                                    const policy::PolicyState& policy, int epoch) {
    if (window.empty()) {
        throw ConfigError("record_diagnostics: empty window");
    }
    const std::size_t n = window.front().cos_matrix.n;
    DiagnosticsFrame f;
    f.epoch = epoch;
    f.tau = policy::tau_matrix(policy);
    f.mean_cos = PairMatrix(n);
    f.conflict_rate = PairMatrix(n);
    f.mean_weight = PairMatrix(n);
    for (const auto& r : window) {
        for (std::size_t k = 0; k < n * n; ++k) {
            f.mean_cos.values[k] += r.cos_matrix.values[k];
            f.conflict_rate.values[k] += r.cos_matrix.values[k] < 0.0 ? 1.0 : 0.0;
            f.mean_weight.values[k] += r.weight_matrix.values[k];
        }
    }
    const double inv = 1.0 / static_cast<double>(window.size());
    for (std::size_t k = 0; k < n * n; ++k) {
        f.mean_cos.values[k] *= inv;
        f.conflict_rate.values[k] *= inv;
        f.mean_weight.values[k] *= inv;
    }
    return f;
}

namespace {

constexpr std::uint64_t kSplitSalt = 0x5bd1e995ULL;
constexpr std::uint64_t kPrimarySalt = 0x27d4eb2fULL;
constexpr std::uint64_t kGuideSalt = 0x165667b1ULL;

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Cycles through a fixed index set in batches, reshuffling at every epoch
// start and whenever the set is exhausted.
class BatchCycler {
public:
    BatchCycler(std::vector<std::size_t> items, std::size_t batch, std::uint64_t seed)
        : items_(std::move(items)), batch_(std::min(batch, items_.size())), rng_(seed) {}

    void new_epoch() {
        synth::shuffle_indices(items_, rng_);
        pos_ = 0;
    }

    std::span<const std::size_t> next() {
        if (pos_ >= items_.size()) {
            new_epoch();
        }
        const std::size_t len = std::min(batch_, items_.size() - pos_);
        std::span<const std::size_t> out(items_.data() + pos_, len);
        pos_ += len;
        return out;
    }

    bool exhausted() const { return pos_ >= items_.size(); }

private:
    std::vector<std::size_t> items_;
    std::size_t batch_;
    std::mt19937_64 rng_;
    std::size_t pos_ = 0;
};

std::string abort_dump(int epoch, int step, std::span<const double> losses) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"epoch\":" << epoch << ",\"step\":" << step << ",\"losses\":[";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        os << (i ? "," : "") << (std::isfinite(losses[i]) ? std::to_string(losses[i]) : "null");
    }
    os << "]}";
    return os.str();
}

} // namespace

RunRecord train_model(const synth::Dataset& data, std::span<const std::size_t> train,
                      std::span<const std::size_t> validation, std::span<const std::size_t> test,
                      const TrainConfig& config, const StepObserver& observer,
                      std::vector<int> target_columns) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const int n_heads = target_columns.empty() ? data.n_tasks : static_cast<int>(target_columns.size());
    synth::MlpModel model = synth::make_mlp(data.input_dim, n_heads, config.seed, 32, std::move(target_columns));

    const bool aim_method = is_aim(config.method);
    std::vector<std::size_t> primary(train.begin(), train.end());
    std::vector<std::size_t> guidance;
    if (aim_method) {
        auto split = synth::make_split(train, {}, {}, config.guidance_fraction, config.seed ^ kSplitSalt);
        primary = std::move(split.primary_train);
        guidance = std::move(split.guidance);
    }

    policy::PolicyState pol;
    if (aim_method) {
        pol = policy::make_policy(policy_mode(config.method), static_cast<std::size_t>(n_heads),
                                  config.tau_init);
        pol.temperature_k = config.temperature_k;
        pol.lambda_g = config.lambda_g;
        pol.lambda_m = config.lambda_m;
        pol.lambda_p = config.lambda_p;
    }

    optim::AdamState adam;
    optim::PlateauSchedulerState plateau;
    plateau.patience = config.plateau_patience;
    plateau.factor = config.plateau_factor;
    plateau.current_lr = config.main_lr;
    plateau.min_lr = std::min(config.plateau_min_lr, config.main_lr);
    optim::CosineRestartState cosine = optim::make_cosine_restart(
        config.policy_lr, config.cosine_t0, config.cosine_t_mult,
        std::min(config.cosine_eta_min, config.policy_lr));

    BatchCycler primary_batches(primary, static_cast<std::size_t>(config.batch_size), config.seed ^ kPrimarySalt);
    std::optional<BatchCycler> guide_batches;
    if (aim_method) {
        guide_batches.emplace(guidance, static_cast<std::size_t>(config.batch_size), config.seed ^ kGuideSalt);
    }

    RunRecord rec;
    rec.seed = config.seed;
    rec.test_indices.assign(test.begin(), test.end());
    ParamVector best_params = model.params;
    std::vector<policy::InterventionResult> window;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double main_lr = plateau.current_lr;
        const double policy_lr = aim_method ? cosine_restart_lr(cosine) : 0.0;
        adam.lr = main_lr;
        primary_batches.new_epoch();
        if (guide_batches) {
            guide_batches->new_epoch();
        }
        const bool want_diag = aim_method && epoch % config.diag_every == 0;
        window.clear();

        double train_acc = 0.0;
        int steps = 0;
        while (!primary_batches.exhausted()) {
            const auto batch = primary_batches.next();
            GradientBundle bundle = synth::mlp_task_grads(model, data, batch);
            if (!all_finite(bundle.losses)) {
                throw TrainingAborted("non-finite training loss", abort_dump(epoch, steps, bundle.losses));
            }
            std::span<const std::size_t> guide_batch;
            std::vector<double> guide_losses;
            if (guide_batches) {
                guide_batch = guide_batches->next();
                guide_losses = synth::mlp_task_losses(model, data, guide_batch);
                if (!all_finite(guide_losses)) {
                    throw TrainingAborted("non-finite guidance loss", abort_dump(epoch, steps, guide_losses));
                }
            }
            CombineOutcome outcome = combine_step(config.method, bundle, guide_losses, &pol, policy_lr);
            if (observer) {
                observer(StepInfo{epoch, batch, guide_batch, bundle, outcome});
            }
            optim::adam_step(adam, model.params, outcome.applied);
            if (want_diag && outcome.intervention) {
                auto& r = *outcome.intervention;
                r.g_intervened.clear();
                r.modified_grads.clear();
                window.push_back(std::move(r));
            }
            train_acc += mean(bundle.losses);
            ++steps;
        }

        const std::vector<double> val = synth::mlp_task_losses(model, data, validation);
        if (!all_finite(val)) {
            throw TrainingAborted("non-finite validation loss", abort_dump(epoch, steps, val));
        }
        const double val_mean = mean(val);
        rec.train_loss.push_back(train_acc / steps);
        rec.val_loss.push_back(val_mean);
        rec.lr_main.push_back(main_lr);
        rec.lr_policy.push_back(policy_lr);
        if (want_diag && !window.empty()) {
            rec.diagnostics.push_back(record_diagnostics(window, pol, epoch));
        }

        const auto decision = metrics::early_stop_check(rec.val_loss, config.patience);
        if (decision.best_epoch == static_cast<std::size_t>(epoch)) {
            best_params = model.params;
        }
        rec.best_epoch = static_cast<int>(decision.best_epoch);
        optim::plateau_step(plateau, val_mean);
        if (aim_method) {
            optim::cosine_restart_advance(cosine);
        }
        if (decision.stop) {
            break;
        }
    }

    model.params = best_params;
    rec.test_mae = synth::mlp_task_mae(model, data, test);
    rec.final_tau = pol.tau;
    rec.skipped_policy_steps = pol.skipped_steps + pol.adam.skipped_steps;
    rec.skipped_main_steps = adam.skipped_steps;
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rec;
}

std::vector<double> train_stl_references(const synth::Dataset& data, std::span<const std::size_t> train,
                                         std::span<const std::size_t> validation,
                                         std::span<const std::size_t> test, const TrainConfig& config) {
    TrainConfig stl = config;
    stl.method = Method::Ls;
    std::vector<double> mae;
    for (int t = 0; t < data.n_tasks; ++t) {
        const RunRecord r = train_model(data, train, validation, test, stl, {}, {t});
        mae.push_back(r.test_mae.front());
    }
    return mae;
}

} // namespace aim::train
