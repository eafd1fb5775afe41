#include <doctest.h>

#include <aim/baselines.hpp>
#include <aim/errors.hpp>
#include <aim/trainer.hpp>

#include <cmath>
#include <limits>
#include <set>

#include "support.hpp"

using namespace aim;
using namespace aim::train;

namespace {

synth::SyntheticSpec spec3() {
    synth::SyntheticSpec s;
    s.n_tasks = 3;
    s.input_dim = 6;
    s.n_train = 200;
    s.n_val = 50;
    s.n_test = 50;
    s.conflict_angle = 110.0;
    s.seed = 21;
    return s;
}

TrainConfig quick(Method m) {
    TrainConfig c;
    c.method = m;
    c.epochs = 6;
    c.patience = 6;
    c.batch_size = 32;
    c.seed = 5;
    c.diag_every = 2;
    return c;
}

struct Fixture {
    synth::SyntheticSpec spec = spec3();
    synth::Dataset data = synth::generate(spec);
    std::vector<std::size_t> train = synth::train_indices(spec);
    std::vector<std::size_t> val = synth::validation_indices(spec);
    std::vector<std::size_t> test = synth::test_indices(spec);
};

} // namespace

TEST_SUITE("trainer") {

TEST_CASE("single task: every method applies the raw gradient") {
    Fixture f;
    for (Method m : {Method::Ls, Method::Pcgrad, Method::AimScalar, Method::AimMatrix}) {
        int steps = 0;
        train_model(f.data, f.train, f.val, f.test, quick(m), [&](const StepInfo& s) {
            CHECK(s.bundle.n_tasks() == 1);
            CHECK(s.outcome.applied == s.bundle.grads[0]);
            ++steps;
        }, {1});
        CHECK(steps > 0);
    }
}

TEST_CASE("linear scalarization applies the exact sum") {
    Fixture f;
    train_model(f.data, f.train, f.val, f.test, quick(Method::Ls), [&](const StepInfo& s) {
        CHECK(s.outcome.applied == baselines::ls_combine(s.bundle));
        CHECK(s.guidance_batch.empty());
    });
}

TEST_CASE("a frozen negative threshold tracks linear scalarization") {
    Fixture f;
    auto cfg = quick(Method::AimMatrix);
    cfg.tau_init = -2.0;
    cfg.policy_lr = 0.0;
    double worst = 0.0;
    auto rec = train_model(f.data, f.train, f.val, f.test, cfg, [&](const StepInfo& s) {
        worst = std::max(worst, testing::scaled_max_error(s.outcome.applied, baselines::ls_combine(s.bundle)));
    });
    CHECK(worst < 1e-3);
    for (std::size_t i = 0; i < rec.final_tau.size(); ++i) {
        if (i % 4 != 0) {
            CHECK(rec.final_tau[i] == -2.0);
        }
    }
}

TEST_CASE("guidance and primary batches never share samples") {
    Fixture f;
    std::set<std::size_t> primary, guidance;
    train_model(f.data, f.train, f.val, f.test, quick(Method::AimScalar), [&](const StepInfo& s) {
        primary.insert(s.primary_batch.begin(), s.primary_batch.end());
        guidance.insert(s.guidance_batch.begin(), s.guidance_batch.end());
        CHECK(s.outcome.policy_updated);
    });
    CHECK(guidance.size() == 20);
    CHECK(primary.size() == 180);
    for (auto g : guidance) {
        CHECK(primary.count(g) == 0);
    }
}

TEST_CASE("runs are bitwise reproducible") {
    Fixture f;
    for (Method m : {Method::Pcgrad, Method::AimMatrix}) {
        auto a = train_model(f.data, f.train, f.val, f.test, quick(m));
        auto b = train_model(f.data, f.train, f.val, f.test, quick(m));
        CHECK(a.train_loss == b.train_loss);
        CHECK(a.val_loss == b.val_loss);
        CHECK(a.test_mae == b.test_mae);
        CHECK(a.final_tau == b.final_tau);
        CHECK(a.lr_policy == b.lr_policy);
        CHECK(a.diagnostics.size() == b.diagnostics.size());
    }
}

TEST_CASE("run record shape") {
    Fixture f;
    auto rec = train_model(f.data, f.train, f.val, f.test, quick(Method::AimMatrix));
    CHECK(rec.train_loss.size() == 6);
    CHECK(rec.lr_main.size() == 6);
    CHECK(rec.test_mae.size() == 3);
    CHECK(rec.diagnostics.size() == 3);
    CHECK(rec.diagnostics[0].epoch == 2);
    CHECK(rec.best_epoch >= 1);
    CHECK(rec.test_indices == f.test);
    auto ls = train_model(f.data, f.train, f.val, f.test, quick(Method::Ls));
    CHECK(ls.diagnostics.empty());
}

TEST_CASE("early stopping ends the run") {
    Fixture f;
    auto cfg = quick(Method::Ls);
    cfg.epochs = 200;
    cfg.patience = 1;
    cfg.main_lr = 1e-300;
    auto rec = train_model(f.data, f.train, f.val, f.test, cfg);
    CHECK(rec.val_loss.size() < 200);
}

TEST_CASE("a flat validation loss halves the main learning rate") {
    Fixture f;
    auto cfg = quick(Method::Ls);
    cfg.epochs = 8;
    cfg.patience = 8;
    cfg.main_lr = 1e-300;
    cfg.plateau_patience = 2;
    cfg.plateau_min_lr = 0.0;
    auto rec = train_model(f.data, f.train, f.val, f.test, cfg);
    REQUIRE(rec.lr_main.size() == 8);
    // Epoch 1 sets the best; epochs 2-4 do not improve; the cut applies from epoch 5.
    CHECK(rec.lr_main[3] == 1e-300);
    CHECK(rec.lr_main[4] == 5e-301);
}

TEST_CASE("trunk conflict on antipodal targets follows the head alignment") {
    synth::SyntheticSpec s;
    s.n_tasks = 2;
    s.input_dim = 6;
    s.n_train = 256;
    s.n_val = 8;
    s.n_test = 8;
    s.conflict_angle = 180.0;
    auto data = synth::generate(s);
    std::vector<std::size_t> batch = synth::train_indices(s);
    for (double sign : {1.0, -1.0}) {
        auto m = synth::make_mlp(6, 2, 3);
        const auto& l = m.layout;
        for (std::size_t k = 0; k <= static_cast<std::size_t>(l.hidden); ++k) {
            m.params[l.head_w(1) + k] = sign * m.params[l.head_w(0) + k];
        }
        auto b = synth::mlp_task_grads(m, data, batch);
        const std::span<const double> t0(b.grads[0].data(), l.head_w(0));
        const std::span<const double> t1(b.grads[1].data(), l.head_w(0));
        // Tied heads must pull the shared layer in opposite directions;
        // opposed heads make the same targets agree.
        CHECK(sign * cosine(t0, t1) < 0.0);
    }
}

TEST_CASE("non-finite losses abort with a dump") {
    Fixture f;
    f.data.y[0] = std::numeric_limits<double>::quiet_NaN();
    auto cfg = quick(Method::Ls);
    cfg.batch_size = 200;
    try {
        train_model(f.data, f.train, f.val, f.test, cfg);
        FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
        CHECK(!e.dump().empty());
    }
}

TEST_CASE("invalid configs are rejected") {
    Fixture f;
    auto cfg = quick(Method::Ls);
    cfg.guidance_fraction = 1.0;
    CHECK_THROWS_AS(train_model(f.data, f.train, f.val, f.test, cfg), ConfigError);
    cfg = quick(Method::Ls);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_model(f.data, f.train, f.val, f.test, cfg), ConfigError);
}

TEST_CASE("diagnostics aggregation") {
    GradientBundle anti{{{1.0, 0.0}, {-2.0, 0.0}, {0.0, 1.0}}, {1, 1, 1}};
    auto p = policy::make_policy(policy::Mode::Scalar, 3, 0.1);
    std::vector<policy::InterventionResult> window{policy::intervene(anti, p), policy::intervene(anti, p)};
    auto d = record_diagnostics(window, p, 10);
    CHECK(d.epoch == 10);
    CHECK(d.conflict_rate(0, 1) == 1.0);
    CHECK(d.mean_cos(0, 1) == -1.0);
    CHECK(d.conflict_rate(0, 2) == 0.0);
    CHECK(d.tau(1, 2) == 0.1);
    CHECK(d.tau(2, 0) == 0.1);

    GradientBundle aligned{{{1.0, 1.0}, {2.0, 1.0}}, {1, 1}};
    auto q = policy::make_policy(policy::Mode::Matrix, 2);
    std::vector<policy::InterventionResult> w2{policy::intervene(aligned, q)};
    auto e = record_diagnostics(w2, q, 1);
    CHECK(e.conflict_rate(0, 1) == 0.0);
    CHECK(e.conflict_rate(1, 0) == 0.0);
    CHECK_THROWS_AS(record_diagnostics({}, q, 1), ConfigError);
}

}
