#include <doctest.h>

#include <aim/errors.hpp>
#include <aim/metrics.hpp>

#include <vector>

using namespace aim;
using namespace aim::metrics;

TEST_SUITE("metrics") {

TEST_CASE("delta_m examples") {
    std::vector<double> stl{1.0, 1.0};
    CHECK(delta_m(stl, stl) == 0.0);
    CHECK(delta_m(std::vector<double>{1.1, 0.9}, stl) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    std::vector<double> s3{0.5, 2.0, 7.0};
    CHECK(delta_m(std::vector<double>{1.0, 4.0, 14.0}, s3) == 100.0);
}

TEST_CASE("delta_m rejects non-positive references and shape mismatch") {
    CHECK_THROWS(delta_m(std::vector<double>{1.0}, std::vector<double>{0.0}));
    CHECK_THROWS(delta_m(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}));
}

TEST_CASE("mean rank examples") {
    auto sym = mean_rank({{1, 2}, {2, 1}});
    CHECK(sym[0] == 1.5);
    CHECK(sym[1] == 1.5);
    auto best = mean_rank({{0.1, 0.2, 0.3}, {1, 1, 1}, {2, 0.5, 4}});
    CHECK(best[0] == 1.0);
    auto ties = mean_rank({{1}, {1}, {2}});
    CHECK(ties[0] == 1.5);
    CHECK(ties[1] == 1.5);
    CHECK(ties[2] == 3.0);
}

TEST_CASE("early stopping") {
    std::vector<double> improving;
    for (int e = 0; e < 50; ++e) {
        improving.push_back(100.0 - e);
        auto d = early_stop_check(improving, 3);
        CHECK_FALSE(d.stop);
        CHECK(d.best_epoch == improving.size());
    }

    std::vector<double> flat;
    for (int e = 1; e <= 4; ++e) {
        flat.push_back(1.0);
        auto d = early_stop_check(flat, 3);
        CHECK(d.best_epoch == 1);
        CHECK(d.stop == (e == 4));
    }

    // Improvements smaller than the threshold do not count.
    auto tiny = early_stop_check(std::vector<double>{1.0, 1.0 - 1e-9, 1.0 - 2e-9, 1.0 - 3e-9}, 3);
    CHECK(tiny.stop);
    CHECK(tiny.best_epoch == 1);
}

}
