#include "aim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <mutex>
#include <sstream>
#include <thread>

#include "aim/errors.hpp"
#include "aim/metrics.hpp"
#include "aim/run_io.hpp"

namespace aim::experiment {

namespace fs = std::filesystem;

void SynthExperiment::validate() const {
    spec.validate();
    if (sizes.empty() || methods.empty()) {
        throw ConfigError("experiment needs at least one size and one method");
    }
    for (int s : sizes) {
        if (s < 1 || s > spec.n_train) {
            throw ConfigError("training size " + std::to_string(s) + " outside [1, n_train=" +
                              std::to_string(spec.n_train) + "]");
        }
    }
    if (seeds < 1 || jobs < 1) {
        throw ConfigError("seeds and jobs must be >= 1");
    }
}

namespace {

// Runs jobs[i]() for all i on up to `workers` threads. The first exception
// is rethrown after all workers finish.
void run_parallel(const std::vector<std::function<void()>>& jobs, int workers) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                jobs[i]();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, workers));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(n, jobs.size()); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) {
        acc += (x - m) * (x - m);
    }
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

SynthResult run_synth_experiment(const SynthExperiment& exp, const std::optional<fs::path>& out_dir) {
    exp.validate();
    const synth::Dataset data = synth::generate(exp.spec);
    const auto train_all = synth::train_indices(exp.spec);
    const auto val = synth::validation_indices(exp.spec);
    const auto test = synth::test_indices(exp.spec);

    SynthResult result;
    const auto n_seeds = static_cast<std::size_t>(exp.seeds);
    result.stl_mae.assign(n_seeds, {});

    std::vector<RunKey> keys;
    for (int size : exp.sizes) {
        for (Method m : exp.methods) {
            for (int s = 0; s < exp.seeds; ++s) {
                keys.push_back({m, size, s});
            }
        }
    }
    std::vector<train::RunRecord> records(keys.size());

    auto seeded = [&](int seed_index) {
        train::TrainConfig c = exp.base;
        c.seed = exp.base.seed + static_cast<std::uint64_t>(seed_index);
        return c;
    };

    std::vector<std::function<void()>> jobs;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        jobs.emplace_back([&, s] {
            const train::TrainConfig c = seeded(static_cast<int>(s));
            result.stl_mae[s] = train::train_stl_references(data, train_all, val, test, c);
        });
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
        jobs.emplace_back([&, k] {
            train::TrainConfig c = seeded(keys[k].seed_index);
            c.method = keys[k].method;
            const std::span<const std::size_t> subset(train_all.data(), static_cast<std::size_t>(keys[k].size));
            records[k] = train::train_model(data, subset, val, test, c);
        });
    }
    run_parallel(jobs, exp.jobs);

    for (std::size_t k = 0; k < keys.size(); ++k) {
        result.runs.emplace_back(keys[k], std::move(records[k]));
    }

    const auto n_tasks = static_cast<std::size_t>(exp.spec.n_tasks);
    for (int size : exp.sizes) {
        std::vector<SummaryRow> block;
        for (Method m : exp.methods) {
            SummaryRow row;
            row.method = m;
            row.size = size;
            row.mean_mae.assign(n_tasks, 0.0);
            for (const auto& [key, rec] : result.runs) {
                if (key.method != m || key.size != size) {
                    continue;
                }
                row.delta_m.push_back(metrics::delta_m(rec.test_mae, result.stl_mae[static_cast<std::size_t>(key.seed_index)]));
                for (std::size_t t = 0; t < n_tasks; ++t) {
                    row.mean_mae[t] += rec.test_mae[t] / static_cast<double>(exp.seeds);
                }
            }
            row.delta_m_mean = std::accumulate(row.delta_m.begin(), row.delta_m.end(), 0.0) /
                               static_cast<double>(row.delta_m.size());
            row.delta_m_std = sample_std(row.delta_m);
            block.push_back(std::move(row));
        }
        std::vector<std::vector<double>> table;
        for (const auto& r : block) {
            table.push_back(r.mean_mae);
        }
        const auto ranks = metrics::mean_rank(table);
        for (std::size_t i = 0; i < block.size(); ++i) {
            block[i].mean_rank = ranks[i];
            result.rows.push_back(std::move(block[i]));
        }
    }

    if (out_dir) {
        for (const auto& [key, rec] : result.runs) {
            train::TrainConfig c = seeded(key.seed_index);
            c.method = key.method;
            io::json cfg = io::to_json(c);
            cfg.update(io::to_json(exp.spec));
            cfg["train_size"] = key.size;
            cfg["test_begin"] = exp.spec.n_train + exp.spec.n_val;
            cfg["test_count"] = exp.spec.n_test;
            io::write_run_record(*out_dir / ("size_" + std::to_string(key.size)) /
                                     std::string(method_name(key.method)) /
                                     ("seed_" + std::to_string(key.seed_index)),
                                 rec, cfg);
        }
        std::ostringstream stl;
        stl << "seed,task,mae\n";
        for (std::size_t s = 0; s < n_seeds; ++s) {
            for (std::size_t t = 0; t < result.stl_mae[s].size(); ++t) {
                stl << s << ',' << t << ',' << io::format_real(result.stl_mae[s][t]) << '\n';
            }
        }
        io::write_text_atomic(*out_dir / "stl_mae.csv", stl.str());
        io::write_text_atomic(*out_dir / "summary.csv", summary_csv(result));
    }
    return result;
}

std::string summary_csv(const SynthResult& result) {
    std::ostringstream out;
    out << "method,size,n_seeds,delta_m_mean,delta_m_std,mean_rank\n";
    for (const auto& r : result.rows) {
        out << method_name(r.method) << ',' << r.size << ',' << r.delta_m.size() << ','
            << io::format_real(r.delta_m_mean) << ',' << io::format_real(r.delta_m_std) << ','
            << io::format_real(r.mean_rank) << '\n';
    }
    return out.str();
}

} // namespace aim::experiment
