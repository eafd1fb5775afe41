// Command-line driver: toy-landscape trajectories, synthetic multi-task
// sweeps, and diagnostics export.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aim/errors.hpp"
#include "aim/experiment.hpp"
#include "aim/run_io.hpp"
#include "aim/simd/kernels.hpp"
#include "aim/toyland.hpp"

namespace fs = std::filesystem;
using aim::io::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds;
};

fs::path output_root(const CommonFlags& f) {
    if (f.out) {
        return *f.out;
    }
    if (const char* env = std::getenv("AIM_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "aim_out";
}

json load_config(const CommonFlags& f, const std::vector<std::string>& extra_keys) {
    if (!f.config) {
        return json::object();
    }
    json j;
    try {
        j = aim::io::read_json_file(*f.config);
    } catch (const json::exception& e) {
        throw aim::ConfigError("config file " + *f.config + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw aim::ConfigError("config file " + *f.config + " must hold a JSON object");
    }
    const auto unknown = aim::io::unknown_keys(j, extra_keys);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) {
            msg += " " + k;
        }
        throw aim::ConfigError(msg);
    }
    return j;
}

template <typename T>
void override_with(const std::optional<T>& flag, T& target) {
    if (flag) {
        target = *flag;
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

void print_error(const char* kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

struct ToyFlags {
    std::optional<std::string> problem;
    std::optional<std::string> method;
    std::optional<int> steps;
    std::optional<double> lr;
    std::optional<double> policy_lr;
    std::optional<int> resolution;
};

int run_toy(const CommonFlags& common, const ToyFlags& flags) {
    const json cfg_file = load_config(common, {"problem", "steps", "lr", "resolution"});
    std::string problem_s = cfg_file.value("problem", std::string());
    std::string method_s = cfg_file.value("method", std::string("aim_matrix"));
    override_with(flags.problem, problem_s);
    override_with(flags.method, method_s);
    if (problem_s.empty()) {
        throw aim::ConfigError("--problem is required (valid: convex_pair, conflict_valley)");
    }
    const auto problem = aim::toy::parse_problem(problem_s);

    aim::toy::ToyRunConfig cfg;
    cfg.method = aim::parse_method(method_s);
    cfg.steps = cfg_file.value("steps", cfg.steps);
    cfg.lr = cfg_file.value("lr", cfg.lr);
    cfg.policy_lr = cfg_file.value("policy_lr", cfg.policy_lr);
    cfg.temperature_k = cfg_file.value("temperature_k", cfg.temperature_k);
    cfg.lambda_g = cfg_file.value("lambda_g", cfg.lambda_g);
    cfg.lambda_m = cfg_file.value("lambda_m", cfg.lambda_m);
    cfg.lambda_p = cfg_file.value("lambda_p", cfg.lambda_p);
    int resolution = cfg_file.value("resolution", aim::toy::kDefaultFrontResolution);
    std::uint64_t seed = cfg_file.value("seed", std::uint64_t{0});
    override_with(flags.steps, cfg.steps);
    override_with(flags.lr, cfg.lr);
    override_with(flags.policy_lr, cfg.policy_lr);
    override_with(flags.resolution, resolution);
    override_with(common.seed, seed);
    if (cfg.steps < 1 || !(cfg.lr > 0.0) || cfg.policy_lr < 0.0) {
        throw aim::ConfigError("steps must be >= 1, lr > 0 and policy_lr >= 0");
    }

    const fs::path dir = output_root(common) /
                         ("toy_" + std::string(aim::toy::problem_name(problem)) + "_" +
                          std::string(aim::method_name(cfg.method)));
    const auto front = aim::toy::pareto_front_oracle(problem, resolution);
    aim::io::write_text_atomic(dir / "front.csv", aim::io::front_csv(front));

    const json resolved{
        {"problem", std::string(aim::toy::problem_name(problem))},
        {"method", std::string(aim::method_name(cfg.method))},
        {"steps", cfg.steps},
        {"lr", cfg.lr},
        {"policy_lr", cfg.policy_lr},
        {"temperature_k", cfg.temperature_k},
        {"lambda_g", cfg.lambda_g},
        {"lambda_m", cfg.lambda_m},
        {"lambda_p", cfg.lambda_p},
        {"resolution", resolution},
        {"seed", seed},
    };
    aim::io::write_text_atomic(dir / "config.json", resolved.dump(2) + "\n");

    std::cout << "start,x0,y0,final_x,final_y,final_dist_front\n";
    for (std::size_t k = 0; k < aim::toy::kStartGrid.size(); ++k) {
        const auto& start = aim::toy::kStartGrid[k];
        const auto traj = aim::toy::run_trajectory(problem, start, cfg, front);
        aim::io::write_text_atomic(dir / ("traj_start" + std::to_string(k) + ".csv"),
                                   aim::io::trajectory_csv(traj));
        std::cout << k << ',' << aim::io::format_real(start[0]) << ',' << aim::io::format_real(start[1])
                  << ',' << aim::io::format_real(traj.final_theta[0]) << ','
                  << aim::io::format_real(traj.final_theta[1]) << ','
                  << aim::io::format_real(traj.rows.back().dist_front) << '\n';
    }
    return 0;
}

struct SynthFlags {
    std::optional<std::string> sizes;
    std::optional<std::string> methods;
    std::optional<int> epochs;
    std::optional<int> patience;
    std::optional<int> batch_size;
    std::optional<double> main_lr;
    std::optional<double> policy_lr;
    std::optional<int> diag_every;
    std::optional<int> n_tasks;
    std::optional<int> input_dim;
    std::optional<int> n_train;
    std::optional<int> n_val;
    std::optional<int> n_test;
    std::optional<double> conflict_angle;
    std::optional<double> noise_std;
    std::optional<std::uint64_t> data_seed;
    std::optional<int> jobs;
};

int run_synth(const CommonFlags& common, const SynthFlags& flags) {
    const json cfg_file = load_config(common, {"sizes", "methods", "seeds", "jobs"});
    aim::experiment::SynthExperiment exp;
    aim::io::apply_json(cfg_file, exp.base);
    aim::io::apply_json(cfg_file, exp.spec);

    std::vector<int> sizes = cfg_file.value("sizes", std::vector<int>{500, 2000});
    std::vector<std::string> methods =
        cfg_file.value("methods", std::vector<std::string>{"ls", "pcgrad", "aim_scalar", "aim_matrix"});
    exp.seeds = cfg_file.value("seeds", 3);
    exp.jobs = cfg_file.value("jobs", 1);

    if (flags.sizes) {
        sizes.clear();
        for (const auto& s : split_list(*flags.sizes)) {
            try {
                sizes.push_back(std::stoi(s));
            } catch (const std::exception&) {
                throw aim::ConfigError("--sizes: '" + s + "' is not an integer");
            }
        }
    }
    if (flags.methods) {
        methods = split_list(*flags.methods);
    }
    override_with(common.seeds, exp.seeds);
    override_with(common.seed, exp.base.seed);
    override_with(flags.jobs, exp.jobs);
    override_with(flags.epochs, exp.base.epochs);
    override_with(flags.patience, exp.base.patience);
    override_with(flags.batch_size, exp.base.batch_size);
    override_with(flags.main_lr, exp.base.main_lr);
    override_with(flags.policy_lr, exp.base.policy_lr);
    override_with(flags.diag_every, exp.base.diag_every);
    override_with(flags.n_tasks, exp.spec.n_tasks);
    override_with(flags.input_dim, exp.spec.input_dim);
    override_with(flags.n_train, exp.spec.n_train);
    override_with(flags.n_val, exp.spec.n_val);
    override_with(flags.n_test, exp.spec.n_test);
    override_with(flags.conflict_angle, exp.spec.conflict_angle);
    override_with(flags.noise_std, exp.spec.noise_std);
    override_with(flags.data_seed, exp.spec.seed);
    if (!flags.patience && !cfg_file.contains("patience")) {
        exp.base.patience = std::min(exp.base.patience, exp.base.epochs);
    }

    exp.sizes = sizes;
    for (const auto& m : methods) {
        exp.methods.push_back(aim::parse_method(m));
    }
    exp.base.validate();
    exp.validate();

    const fs::path dir = output_root(common) / "synth";
    json resolved = aim::io::to_json(exp.base);
    resolved.erase("method");
    resolved.update(aim::io::to_json(exp.spec));
    resolved["sizes"] = exp.sizes;
    resolved["methods"] = methods;
    resolved["seeds"] = exp.seeds;
    aim::io::write_text_atomic(dir / "config.json", resolved.dump(2) + "\n");

    const auto result = aim::experiment::run_synth_experiment(exp, dir);
    std::cout << aim::experiment::summary_csv(result);
    return 0;
}

int export_diag(const std::string& run_dir, const std::optional<std::string>& out) {
    const std::string csv = aim::io::export_diagnostics_csv(run_dir);
    if (out) {
        aim::io::write_text_atomic(*out, csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AIM multi-task optimization experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("aim 0.1.0 (simd: ") +
                                          std::string(aim::simd::name(aim::simd::active().backend)) + ")");

    CommonFlags common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON config file; flags override its fields");
        sub->add_option("--out", common.out, "output root (default $AIM_OUT_DIR or ./aim_out)");
        sub->add_option("--seed", common.seed, "base random seed");
        sub->add_option("--seeds", common.seeds, "number of seeds");
    };

    const std::vector<std::string> method_names{"ls", "pcgrad", "aim_scalar", "aim_matrix"};

    ToyFlags toy;
    auto* toy_cmd = app.add_subcommand("run-toy", "optimize a two-task toy landscape from the fixed start grid");
    add_common(toy_cmd);
    toy_cmd->add_option("--problem", toy.problem, "convex_pair or conflict_valley")
        ->check(CLI::IsMember({"convex_pair", "conflict_valley"}));
    toy_cmd->add_option("--method", toy.method, "ls, pcgrad, aim_scalar or aim_matrix")
        ->check(CLI::IsMember(method_names));
    toy_cmd->add_option("--steps", toy.steps, "optimizer steps per trajectory (2000)");
    toy_cmd->add_option("--lr", toy.lr, "Adam learning rate (0.01)");
    toy_cmd->add_option("--policy-lr", toy.policy_lr, "policy learning rate (5e-4)");
    toy_cmd->add_option("--resolution", toy.resolution, "Pareto grid points per axis (" + std::to_string(aim::toy::kDefaultFrontResolution) + ")");

    SynthFlags synth;
    auto* synth_cmd = app.add_subcommand("run-synth", "sweep methods and training sizes on synthetic data");
    add_common(synth_cmd);
    synth_cmd->add_option("--sizes", synth.sizes, "comma-separated training sizes");
    synth_cmd->add_option("--methods", synth.methods, "comma-separated methods");
    synth_cmd->add_option("--epochs", synth.epochs);
    synth_cmd->add_option("--patience", synth.patience);
    synth_cmd->add_option("--batch-size", synth.batch_size);
    synth_cmd->add_option("--main-lr", synth.main_lr);
    synth_cmd->add_option("--policy-lr", synth.policy_lr);
    synth_cmd->add_option("--diag-every", synth.diag_every, "diagnostics interval in epochs (10)");
    synth_cmd->add_option("--n-tasks", synth.n_tasks);
    synth_cmd->add_option("--input-dim", synth.input_dim);
    synth_cmd->add_option("--n-train", synth.n_train);
    synth_cmd->add_option("--n-val", synth.n_val);
    synth_cmd->add_option("--n-test", synth.n_test);
    synth_cmd->add_option("--conflict-angle", synth.conflict_angle, "degrees between task weight vectors");
    synth_cmd->add_option("--noise-std", synth.noise_std);
    synth_cmd->add_option("--data-seed", synth.data_seed);
    synth_cmd->add_option("--jobs", synth.jobs, "worker threads");

    std::string run_dir;
    std::optional<std::string> export_out;
    auto* diag_cmd = app.add_subcommand("export-diag", "flatten diag_epoch_<e>.json files to long-format CSV");
    diag_cmd->add_option("run_dir", run_dir, "run-record directory")->required();
    diag_cmd->add_option("--out", export_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (toy_cmd->parsed()) {
            return run_toy(common, toy);
        }
        if (synth_cmd->parsed()) {
            return run_synth(common, synth);
        }
        return export_diag(run_dir, export_out);
    } catch (const aim::ConfigError& e) {
        print_error("config", e.what());
        return kExitUsage;
    } catch (const aim::TrainingAborted& e) {
        print_error("training_aborted", std::string(e.what()) + " " + e.dump());
        return kExitRuntime;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return kExitRuntime;
    }
}
