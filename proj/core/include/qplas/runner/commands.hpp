#pragma once

// Batch commands behind the `qplas` executable. Each command writes its files
// into config.output_dir together with a `manifest_<command>.json` that
// reproduces the run when passed back as the config.

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/estimation/bootstrap.hpp"
#include "qplas/runner/config.hpp"

namespace qplas::runner {

std::string_view version() noexcept;

enum class ModeSelection { Quantum, Classical, Both };
ModeSelection parse_mode_selection(std::string_view name);
std::vector<estimation::NoiseMode> modes_of(ModeSelection selection);

// Exit status for an exception escaping a command.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitEstimation = 4 };
int exit_code_for(const std::exception& e) noexcept;

// Noise-free transmission of one injection on the configured time grid.
struct TruthCurve {
    std::string label;
    double L0 = 0.0;
    double ks = 0.0;
    double occupancy = 0.0;  // steady-state bound fraction KA L0 / (1 + KA L0)
    std::vector<double> time_s;
    std::vector<double> T;
};

// Bin times from -pre_injection_s in steps of bin_seconds, strictly below
// duration_s; empty when the duration is zero.
std::vector<double> time_grid(const RunConfig& config);
std::vector<TruthCurve> truth_curves(const RunConfig& config);

struct ResultRow {
    std::string parameter;  // `ks[<dataset>]`, `KA`, `kd` or `ka`
    estimation::NoiseMode mode = estimation::NoiseMode::Quantum;
    estimation::Summary summary;
};

struct EstimateReport {
    std::vector<ResultRow> rows;
    std::vector<std::string> warnings;
    std::string table;  // human-readable comparison of the two modes
};

struct CommandResult {
    std::vector<std::filesystem::path> files;  // written, manifest last
    std::vector<std::string> warnings;
    std::string report;                        // text for stdout
};

// One dataset CSV per injection (and time-tag CSVs when enabled).
CommandResult cmd_simulate(const RunConfig& config);

// ks per dataset and, with three or more datasets, KA, kd and ka. Each
// dataset must carry an L0_M column.
EstimateReport run_estimation(const std::vector<estimation::ExperimentDataset>& datasets, const RunConfig& config,
                              ModeSelection modes);
CommandResult cmd_estimate(const std::vector<std::string>& dataset_paths, const RunConfig& config, ModeSelection modes);

// Per-bin measured set std against both noise laws, one CSV per dataset.
CommandResult cmd_compare(const std::vector<std::string>& dataset_paths, const RunConfig& config);

// A merged `channel,timestamp_ps` file, or two single-channel files (A then
// B), converted to a dataset CSV.
estimation::ExperimentDataset dataset_from_streams(const timetag::Streams& streams, const RunConfig& config);
CommandResult cmd_ingest_timetags(const std::vector<std::string>& paths, const RunConfig& config);

// Dataset file as read by cmd_estimate: parsed, labelled by file stem.
estimation::ExperimentDataset load_dataset(const std::string& path);

}  // namespace qplas::runner
