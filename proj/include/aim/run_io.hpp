#pragma once
// On-disk formats: resolved config JSON, run-record directories,
// diagnostics snapshots and the long-format diagnostics export. All text
// files are UTF-8 with LF line endings; CSVs are comma-delimited with a
// header row and print reals with 17 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aim/synthbench.hpp"
#include "aim/toyland.hpp"
#include "aim/trainer.hpp"

namespace aim::io {

using nlohmann::json;

std::string format_real(double v);

json to_json(const train::TrainConfig& c);
json to_json(const synth::SyntheticSpec& s);

/// Overlays recognised keys from j onto c / s. Unknown keys are ignored here;
/// callers that own the whole document check for them with unknown_keys().
void apply_json(const json& j, train::TrainConfig& c);
void apply_json(const json& j, synth::SyntheticSpec& s);

/// Keys of j that neither TrainConfig nor SyntheticSpec (nor `extra`) know.
std::vector<std::string> unknown_keys(const json& j, const std::vector<std::string>& extra = {});

/// Writes through a temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

json read_json_file(const std::filesystem::path& path);

json diagnostics_to_json(const train::DiagnosticsFrame& f);
train::DiagnosticsFrame diagnostics_from_json(const json& j);

/// metrics.csv, test_mae.csv, diag_epoch_<e>.json and config.json.
void write_run_record(const std::filesystem::path& dir, const train::RunRecord& rec,
                      const json& resolved_config);

/// Long-format rows "epoch,i,j,metric,value" for every diag_epoch_<e>.json in
/// run_dir, ordered by epoch. Throws ConfigError when none exist and
/// std::runtime_error naming every unreadable file.
std::string export_diagnostics_csv(const std::filesystem::path& run_dir);

std::string trajectory_csv(const toy::Trajectory& t);
std::string front_csv(const toy::ParetoFront& f);

} // namespace aim::io
