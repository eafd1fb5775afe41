#include <doctest.h>

#include <aim/errors.hpp>
#include <aim/synthbench.hpp>
#include <aim/vecmath.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace aim;
using namespace aim::synth;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SyntheticSpec small_spec() {
    SyntheticSpec s;
    s.n_tasks = 3;
    s.input_dim = 5;
    s.n_train = 60;
    s.n_val = 20;
    s.n_test = 20;
    s.conflict_angle = 100.0;
    s.seed = 4;
    return s;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("task weight geometry") {
    auto anti = task_weight_vectors(2, 8, 180.0, 1);
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(anti[1][c] == doctest::Approx(-anti[0][c]).epsilon(1e-12).scale(1.0));
    }
    auto orth = task_weight_vectors(3, 8, 90.0, 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(norm(orth[i]) == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = i + 1; j < 3; ++j) {
            CHECK(std::abs(dot(orth[i], orth[j])) < 1e-10);
        }
    }
    auto same = task_weight_vectors(4, 8, 0.0, 3);
    for (int i = 1; i < 4; ++i) {
        CHECK(testing::scaled_max_error(same[i], same[0]) < 1e-12);
    }
    const double widest = std::acos(-1.0 / 3.0) * 180.0 / std::numbers::pi;
    auto tetra = task_weight_vectors(4, 8, widest, 3);
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            CHECK(dot(tetra[i], tetra[j]) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("infeasible arrangements are configuration errors") {
    CHECK_THROWS_AS(task_weight_vectors(4, 8, 120.0, 0), ConfigError);
    CHECK_THROWS_AS(task_weight_vectors(3, 8, 180.0, 0), ConfigError);
    CHECK_THROWS_AS(task_weight_vectors(5, 3, 90.0, 0), ConfigError);
    SyntheticSpec s;
    CHECK_THROWS_AS(generate(s), ConfigError);
}

TEST_CASE("generation is deterministic and round-trips through csv") {
    auto spec = small_spec();
    auto a = generate(spec);
    auto b = generate(spec);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.size() == static_cast<std::size_t>(spec.total()));

    const auto dir = std::filesystem::temp_directory_path() / "aim_synth_test";
    std::filesystem::create_directories(dir);
    write_dataset_csv(a, dir / "a.csv");
    write_dataset_csv(b, dir / "b.csv");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    auto back = read_dataset_csv(dir / "a.csv", spec.n_tasks);
    CHECK(back.x == a.x);
    CHECK(back.y == a.y);
    std::filesystem::remove_all(dir);
}

TEST_CASE("index ranges partition the dataset") {
    auto spec = small_spec();
    auto tr = train_indices(spec);
    auto va = validation_indices(spec);
    auto te = test_indices(spec);
    CHECK(tr.size() == 60);
    CHECK(va.front() == 60);
    CHECK(te.back() == 99);
}

TEST_CASE("mlp layout") {
    MlpLayout l{8, 32, 4};
    CHECK(l.size() == 8 * 32 + 32 + 4 * 33);
    CHECK(l.head_w(0) == l.b1() + 32);
    CHECK(l.head_b(3) + 1 == l.size());
}

TEST_CASE("zero model on zero targets") {
    auto spec = small_spec();
    auto data = generate(spec);
    std::fill(data.y.begin(), data.y.end(), 0.0);
    auto model = make_mlp(spec.input_dim, spec.n_tasks, 1);
    std::fill(model.params.begin(), model.params.end(), 0.0);
    std::vector<std::size_t> batch{0, 1, 2, 3};
    auto b = mlp_task_grads(model, data, batch);
    for (double l : b.losses) {
        CHECK(l == 0.0);
    }
    for (const auto& g : b.grads) {
        for (double x : g) {
            CHECK(x == 0.0);
        }
    }
}

TEST_CASE("per-task gradients touch only their own head") {
    auto spec = small_spec();
    auto data = generate(spec);
    auto model = make_mlp(spec.input_dim, spec.n_tasks, 2);
    std::vector<std::size_t> batch{5, 6, 7};
    auto b = mlp_task_grads(model, data, batch);
    const auto& l = model.layout;
    for (int t = 0; t < spec.n_tasks; ++t) {
        for (int o = 0; o < spec.n_tasks; ++o) {
            if (o == t) {
                continue;
            }
            for (std::size_t p = l.head_w(o); p <= l.head_b(o); ++p) {
                CHECK(b.grads[t][p] == 0.0);
            }
        }
    }
    auto losses = mlp_task_losses(model, data, batch);
    CHECK(losses == b.losses);
}

TEST_CASE("backprop matches a five-point stencil") {
    std::mt19937_64 rng(77);
    for (int c = 0; c < 5; ++c) {
        auto spec = small_spec();
        spec.seed = static_cast<std::uint64_t>(c);
        auto data = generate(spec);
        auto model = make_mlp(spec.input_dim, spec.n_tasks, 100 + c, 6);
        std::vector<std::size_t> batch{1, 4, 9, 16, 25};
        auto b = mlp_task_grads(model, data, batch);
        for (std::size_t p = 0; p < model.params.size(); ++p) {
            for (int t = 0; t < spec.n_tasks; ++t) {
                auto f = [&](double v) {
                    auto m = model;
                    m.params[p] = v;
                    return mlp_task_losses(m, data, batch)[t];
                };
                const double fd = testing::five_point_difference(f, model.params[p], 1e-3);
                CHECK(std::abs(b.grads[t][p] - fd) <= 1e-5 * std::max(std::abs(fd), std::abs(b.grads[t][p])) + 1e-10);
            }
        }
    }
}

TEST_CASE("mae") {
    auto spec = small_spec();
    auto data = generate(spec);
    auto model = make_mlp(spec.input_dim, spec.n_tasks, 1);
    std::fill(model.params.begin(), model.params.end(), 0.0);
    std::vector<std::size_t> idx{0, 1};
    auto mae = mlp_task_mae(model, data, idx);
    for (int t = 0; t < spec.n_tasks; ++t) {
        CHECK(mae[t] == doctest::Approx((std::abs(data.target(0, t)) + std::abs(data.target(1, t))) / 2));
    }
}

TEST_CASE("guidance split") {
    auto s = split_guidance(100, 0.1, 3);
    CHECK(s.guidance.size() == 10);
    CHECK(s.primary.size() == 90);
    std::set<std::size_t> all(s.guidance.begin(), s.guidance.end());
    all.insert(s.primary.begin(), s.primary.end());
    CHECK(all.size() == 100);
    auto again = split_guidance(100, 0.1, 3);
    CHECK(again.guidance == s.guidance);
    CHECK(again.primary == s.primary);
    CHECK(split_guidance(100, 0.1, 4).guidance != s.guidance);
    CHECK_THROWS_AS(split_guidance(4, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(split_guidance(10, 1.0, 0), ConfigError);
}

TEST_CASE("make_split maps positions to dataset indices") {
    std::vector<std::size_t> train{10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    auto s = make_split(train, {20, 21}, {22}, 0.2, 5);
    CHECK(s.guidance.size() == 2);
    CHECK(s.primary_train.size() == 8);
    for (auto i : s.guidance) {
        CHECK(i >= 10);
        CHECK(i <= 19);
        CHECK(std::find(s.primary_train.begin(), s.primary_train.end(), i) == s.primary_train.end());
    }
    CHECK(s.validation == std::vector<std::size_t>{20, 21});
}

TEST_CASE("shuffle is a permutation and seeded") {
    std::vector<std::size_t> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
        a[i] = b[i] = i;
    }
    std::mt19937_64 ra(1), rb(1);
    shuffle_indices(a, ra);
    shuffle_indices(b, rb);
    CHECK(a == b);
    std::sort(a.begin(), a.end());
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(a[i] == i);
    }
}

}
