#include <doctest.h>

#include <aim/errors.hpp>
#include <aim/run_io.hpp>
#include <aim/trainer.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

using namespace aim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

train::RunRecord small_run() {
    synth::SyntheticSpec s;
    s.n_tasks = 3;
    s.input_dim = 5;
    s.n_train = 100;
    s.n_val = 30;
    s.n_test = 30;
    s.conflict_angle = 105.0;
    auto data = synth::generate(s);
    train::TrainConfig c;
    c.method = Method::AimMatrix;
    c.epochs = 4;
    c.patience = 4;
    c.diag_every = 2;
    c.batch_size = 16;
    return train::train_model(data, synth::train_indices(s), synth::validation_indices(s),
                              synth::test_indices(s), c);
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("reals print with 17 significant digits and round-trip") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(std::strtod(io::format_real(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("config json round trip and unknown keys") {
    train::TrainConfig c;
    c.method = Method::Pcgrad;
    c.main_lr = 0.0123;
    c.seed = 99;
    synth::SyntheticSpec s;
    s.conflict_angle = 101.5;
    auto j = io::to_json(c);
    j.update(io::to_json(s));
    train::TrainConfig c2;
    synth::SyntheticSpec s2;
    io::apply_json(j, c2);
    io::apply_json(j, s2);
    CHECK(c2.method == Method::Pcgrad);
    CHECK(c2.main_lr == 0.0123);
    CHECK(c2.seed == 99);
    CHECK(s2.conflict_angle == 101.5);
    CHECK(io::unknown_keys(j).empty());
    j["bogus"] = 1;
    CHECK(io::unknown_keys(j) == std::vector<std::string>{"bogus"});
    CHECK(io::unknown_keys(j, {"bogus"}).empty());
}

TEST_CASE("diagnostics json round trip") {
    train::DiagnosticsFrame f;
    f.epoch = 7;
    f.tau = PairMatrix(2);
    f.mean_cos = PairMatrix(2);
    f.conflict_rate = PairMatrix(2);
    f.mean_weight = PairMatrix(2);
    f.tau(0, 1) = 0.1;
    f.mean_cos(1, 0) = -1.0 / 3.0;
    f.mean_weight(0, 0) = 1e-300;
    auto back = io::diagnostics_from_json(nlohmann::json::parse(io::diagnostics_to_json(f).dump()));
    CHECK(back.epoch == 7);
    CHECK(back.tau.values == f.tau.values);
    CHECK(back.mean_cos.values == f.mean_cos.values);
    CHECK(back.mean_weight.values == f.mean_weight.values);
}

TEST_CASE("run record directory and long-format export") {
    auto rec = small_run();
    REQUIRE(rec.diagnostics.size() == 2);
    auto dir = fresh_dir("aim_io_run");
    io::write_run_record(dir, rec, nlohmann::json{{"method", "aim_matrix"}});
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "test_mae.csv"));
    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "diag_epoch_2.json"));
    CHECK(fs::exists(dir / "diag_epoch_4.json"));

    auto metrics = lines_of([&] {
        std::ifstream in(dir / "metrics.csv");
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }());
    CHECK(metrics.front() == "epoch,train_loss,val_loss,lr_main,lr_policy");
    CHECK(metrics.size() == rec.train_loss.size() + 1);

    auto csv = lines_of(io::export_diagnostics_csv(dir));
    CHECK(csv.front() == "epoch,i,j,metric,value");
    CHECK(csv.size() - 1 == 2 * 3 * 3 * 4);

    // Every CSV value parses back to the exact double stored in the JSON.
    std::map<std::tuple<int, int, int, std::string>, double> parsed;
    for (std::size_t r = 1; r < csv.size(); ++r) {
        std::istringstream in(csv[r]);
        std::string e, i, j, metric, value;
        std::getline(in, e, ',');
        std::getline(in, i, ',');
        std::getline(in, j, ',');
        std::getline(in, metric, ',');
        std::getline(in, value, ',');
        parsed[{std::stoi(e), std::stoi(i), std::stoi(j), metric}] = std::strtod(value.c_str(), nullptr);
    }
    for (const auto& f : rec.diagnostics) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                CHECK(parsed.at({f.epoch, i, j, "tau"}) == f.tau(i, j));
                CHECK(parsed.at({f.epoch, i, j, "mean_cos"}) == f.mean_cos(i, j));
                CHECK(parsed.at({f.epoch, i, j, "conflict_rate"}) == f.conflict_rate(i, j));
                CHECK(parsed.at({f.epoch, i, j, "mean_weight"}) == f.mean_weight(i, j));
            }
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("export errors") {
    auto empty = fresh_dir("aim_io_empty");
    CHECK_THROWS_AS(io::export_diagnostics_csv(empty), ConfigError);
    {
        std::ofstream(empty / "diag_epoch_3.json") << "{ not json";
    }
    try {
        io::export_diagnostics_csv(empty);
        FAIL("expected an error");
    } catch (const ConfigError&) {
        FAIL("corrupt file reported as missing");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("diag_epoch_3.json") != std::string::npos);
    }
    fs::remove_all(empty);
}

TEST_CASE("atomic writes replace content") {
    auto dir = fresh_dir("aim_io_atomic");
    io::write_text_atomic(dir / "f.txt", "one\n");
    io::write_text_atomic(dir / "f.txt", "two\n");
    std::ifstream in(dir / "f.txt");
    std::string s;
    std::getline(in, s);
    CHECK(s == "two");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) {
        ++n;
    }
    CHECK(n == 1);
    fs::remove_all(dir);
}

}
