#include "aim/run_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "aim/errors.hpp"

namespace aim::io {

namespace fs = std::filesystem;

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const train::TrainConfig& c) {
    return json{
        {"method", std::string(method_name(c.method))},
        {"epochs", c.epochs},
        {"patience", c.patience},
        {"batch_size", c.batch_size},
        {"main_lr", c.main_lr},
        {"policy_lr", c.policy_lr},
        {"guidance_fraction", c.guidance_fraction},
        {"seed", c.seed},
        {"lambda_g", c.lambda_g},
        {"lambda_m", c.lambda_m},
        {"lambda_p", c.lambda_p},
        {"temperature_k", c.temperature_k},
        {"tau_init", c.tau_init},
        {"plateau_patience", c.plateau_patience},
        {"plateau_factor", c.plateau_factor},
        {"plateau_min_lr", c.plateau_min_lr},
        {"cosine_t0", c.cosine_t0},
        {"cosine_t_mult", c.cosine_t_mult},
        {"cosine_eta_min", c.cosine_eta_min},
        {"diag_every", c.diag_every},
    };
}

json to_json(const synth::SyntheticSpec& s) {
    return json{
        {"n_tasks", s.n_tasks},           {"input_dim", s.input_dim},
        {"n_train", s.n_train},           {"n_val", s.n_val},
        {"n_test", s.n_test},             {"conflict_angle", s.conflict_angle},
        {"noise_std", s.noise_std},       {"data_seed", s.seed},
    };
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config field '") + key + "': " + e.what());
        }
    }
}

} // namespace

void apply_json(const json& j, train::TrainConfig& c) {
    if (j.contains("method")) {
        c.method = parse_method(j.at("method").get<std::string>());
    }
    take(j, "epochs", c.epochs);
    take(j, "patience", c.patience);
    take(j, "batch_size", c.batch_size);
    take(j, "main_lr", c.main_lr);
    take(j, "policy_lr", c.policy_lr);
    take(j, "guidance_fraction", c.guidance_fraction);
    take(j, "seed", c.seed);
    take(j, "lambda_g", c.lambda_g);
    take(j, "lambda_m", c.lambda_m);
    take(j, "lambda_p", c.lambda_p);
    take(j, "temperature_k", c.temperature_k);
    take(j, "tau_init", c.tau_init);
    take(j, "plateau_patience", c.plateau_patience);
    take(j, "plateau_factor", c.plateau_factor);
    take(j, "plateau_min_lr", c.plateau_min_lr);
    take(j, "cosine_t0", c.cosine_t0);
    take(j, "cosine_t_mult", c.cosine_t_mult);
    take(j, "cosine_eta_min", c.cosine_eta_min);
    take(j, "diag_every", c.diag_every);
}

void apply_json(const json& j, synth::SyntheticSpec& s) {
    take(j, "n_tasks", s.n_tasks);
    take(j, "input_dim", s.input_dim);
    take(j, "n_train", s.n_train);
    take(j, "n_val", s.n_val);
    take(j, "n_test", s.n_test);
    take(j, "conflict_angle", s.conflict_angle);
    take(j, "noise_std", s.noise_std);
    take(j, "data_seed", s.seed);
}

std::vector<std::string> unknown_keys(const json& j, const std::vector<std::string>& extra) {
    std::set<std::string> known;
    for (const json& defaults : {to_json(train::TrainConfig{}), to_json(synth::SyntheticSpec{})}) {
        for (const auto& [k, v] : defaults.items()) {
            known.insert(k);
        }
    }
    known.insert(extra.begin(), extra.end());
    std::vector<std::string> out;
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) {
            out.push_back(k);
        }
    }
    return out;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return json::parse(in);
}

json diagnostics_to_json(const train::DiagnosticsFrame& f) {
    return json{
        {"epoch", f.epoch},
        {"n_tasks", f.tau.n},
        {"tau", f.tau.values},
        {"conflict_rate", f.conflict_rate.values},
        {"mean_cos", f.mean_cos.values},
        {"mean_weight", f.mean_weight.values},
    };
}

train::DiagnosticsFrame diagnostics_from_json(const json& j) {
    train::DiagnosticsFrame f;
    f.epoch = j.at("epoch").get<int>();
    const auto n = j.at("n_tasks").get<std::size_t>();
    auto load = [&](const char* key, PairMatrix& m) {
        m.n = n;
        m.values = j.at(key).get<std::vector<double>>();
        if (m.values.size() != n * n) {
            throw std::runtime_error(std::string("matrix '") + key + "' is not n_tasks x n_tasks");
        }
    };
    load("tau", f.tau);
    load("conflict_rate", f.conflict_rate);
    load("mean_cos", f.mean_cos);
    load("mean_weight", f.mean_weight);
    return f;
}

void write_run_record(const fs::path& dir, const train::RunRecord& rec, const json& resolved_config) {
    fs::create_directories(dir);

    std::ostringstream metrics;
    metrics << "epoch,train_loss,val_loss,lr_main,lr_policy\n";
    for (std::size_t e = 0; e < rec.val_loss.size(); ++e) {
        metrics << e + 1 << ',' << format_real(rec.train_loss[e]) << ',' << format_real(rec.val_loss[e])
                << ',' << format_real(rec.lr_main[e]) << ',' << format_real(rec.lr_policy[e]) << '\n';
    }
    write_text_atomic(dir / "metrics.csv", metrics.str());

    std::ostringstream mae;
    mae << "task,mae\n";
    for (std::size_t t = 0; t < rec.test_mae.size(); ++t) {
        mae << t << ',' << format_real(rec.test_mae[t]) << '\n';
    }
    write_text_atomic(dir / "test_mae.csv", mae.str());

    for (const auto& f : rec.diagnostics) {
        write_text_atomic(dir / ("diag_epoch_" + std::to_string(f.epoch) + ".json"),
                          diagnostics_to_json(f).dump() + "\n");
    }
    write_text_atomic(dir / "config.json", resolved_config.dump(2) + "\n");
}

std::string export_diagnostics_csv(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir)) {
        throw ConfigError("run directory does not exist: " + run_dir.string());
    }
    static const std::regex pattern(R"(diag_epoch_(\d+)\.json)");
    std::map<long, fs::path> files;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
            files.emplace(std::stol(m[1].str()), entry.path());
        }
    }
    if (files.empty()) {
        throw ConfigError("no diag_epoch_<e>.json files in " + run_dir.string());
    }

    std::vector<train::DiagnosticsFrame> frames;
    std::vector<std::string> bad;
    for (const auto& [epoch, path] : files) {
        try {
            frames.push_back(diagnostics_from_json(read_json_file(path)));
        } catch (const std::exception& e) {
            bad.push_back(path.string() + " (" + e.what() + ")");
        }
    }
    if (!bad.empty()) {
        std::string msg = "unreadable diagnostics files:";
        for (const auto& b : bad) {
            msg += "\n  " + b;
        }
        throw std::runtime_error(msg);
    }

    std::ostringstream out;
    out << "epoch,i,j,metric,value\n";
    for (const auto& f : frames) {
        const std::pair<const char*, const PairMatrix*> metrics[] = {
            {"tau", &f.tau},
            {"conflict_rate", &f.conflict_rate},
            {"mean_cos", &f.mean_cos},
            {"mean_weight", &f.mean_weight},
        };
        for (const auto& [name, m] : metrics) {
            for (std::size_t i = 0; i < m->n; ++i) {
                for (std::size_t j = 0; j < m->n; ++j) {
                    out << f.epoch << ',' << i << ',' << j << ',' << name << ',' << format_real((*m)(i, j))
                        << '\n';
                }
            }
        }
    }
    return out.str();
}

std::string trajectory_csv(const toy::Trajectory& t) {
    std::ostringstream out;
    out << "step,x,y,L1,L2,dist_front\n";
    for (const auto& r : t.rows) {
        out << r.step << ',' << format_real(r.x) << ',' << format_real(r.y) << ',' << format_real(r.l1)
            << ',' << format_real(r.l2) << ',' << format_real(r.dist_front) << '\n';
    }
    return out.str();
}

std::string front_csv(const toy::ParetoFront& f) {
    std::ostringstream out;
    out << "x,y,L1,L2\n";
    for (const auto& p : f.points) {
        out << format_real(p.x) << ',' << format_real(p.y) << ',' << format_real(p.l1) << ','
            << format_real(p.l2) << '\n';
    }
    return out.str();
}

} // namespace aim::io
