#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seeto/archive.hpp"
#include "seeto/metrics.hpp"
#include "seeto/optimizer.hpp"
#include "seeto/problems.hpp"

namespace seeto {

// Environment variable that overrides ExperimentConfig::output_dir.
inline constexpr const char* kOutputDirEnv = "SEETO_OUTPUT_DIR";

struct ExperimentConfig {
    TaskFamilyParams family;
    OptimizerConfig optimizer;
    std::vector<Mode> modes{Mode::Seeto, Mode::Baseline};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::size_t> targets;  // 0-based target indices (1-based in JSON); empty runs all
    std::uint64_t source_seed = 1000;  // source task i is solved with source_seed + i
    std::vector<std::uint64_t> hv_marks{20, 40, 60};
    std::uint64_t base_fe = 20;
    std::filesystem::path output_dir = "seeto-out";
};

// Parses and validates a JSON experiment config. Unknown keys and wrong types
// raise ConfigError carrying the JSON path of the field.
[[nodiscard]] ExperimentConfig parse_experiment_config(const std::string& text);

// Reads a config file and applies the output directory override.
[[nodiscard]] ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Solves every source task of the family with the baseline and archives it.
[[nodiscard]] SourceArchive build_source_archive(const TaskFamily& family, const ExperimentConfig& cfg);

struct SummaryRow {
    TaskId task_id;
    Mode mode = Mode::Seeto;
    std::size_t runs = 0;
    std::size_t failures = 0;
    std::optional<double> c;
    std::vector<double> hv_mean;  // one per hv mark
    std::vector<double> hv_std;   // sample standard deviation
    std::optional<double> delta_hv_percent;  // mean HV at base_fe against seeto's
    std::optional<AdditionalFe> additional_fe;
};

// Per (task, mode) statistics over seeds. Runs must come from a single config.
[[nodiscard]] std::vector<SummaryRow> summarize(const std::vector<RunTrajectory>& runs,
                                                const std::vector<std::uint64_t>& hv_marks, std::uint64_t base_fe,
                                                std::uint64_t fe_max);

[[nodiscard]] std::string trajectory_csv(const RunTrajectory& traj);
[[nodiscard]] std::string summary_csv(const std::vector<SummaryRow>& rows, const std::vector<std::uint64_t>& hv_marks);

// File name of a run's trajectory inside <output_dir>/trajectories.
[[nodiscard]] std::string trajectory_file_name(const RunTrajectory& traj);

struct ExperimentResult {
    std::vector<RunTrajectory> runs;
    std::vector<SummaryRow> summary;
    std::size_t failures = 0;
};

// Full sequential protocol: source archive, then every requested
// (target, mode, seed) run against a private copy of the source archive.
// Writes archive.json, trajectories/*.csv, summary.csv and, on failures,
// errors.txt under cfg.output_dir.
ExperimentResult run_sequence(const ExperimentConfig& cfg);

// One target run against the family's source archive.
RunTrajectory run_single(const ExperimentConfig& cfg, std::size_t target_index, Mode mode, std::uint64_t seed,
                         const SourceArchive& sources);

void write_text_file(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

// TaskState as JSON {"channels","height","width","frames"}.
[[nodiscard]] std::string task_state_to_json(const TaskState& state);
[[nodiscard]] TaskState task_state_from_json(const std::string& text);

}  // namespace seeto
