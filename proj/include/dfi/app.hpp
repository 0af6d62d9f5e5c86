#pragma once

// Command implementations behind the `dfi` executable. Each command reads its inputs, calls
// the library, and writes artifacts; the executable only parses flags and maps exceptions to
// exit codes.

#include "dfi/archive.hpp"
#include "dfi/core_types.hpp"
#include "dfi/gsa.hpp"
#include "dfi/pipeline.hpp"
#include "dfi/testmodels.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dfi::app {

namespace fs = std::filesystem;

enum ExitCode : int { success = 0, validation_failure = 2, numerical_failure = 3, inconsistent = 4 };

/// Config file (optional) followed by `key=value` overrides in order.
CalibrationConfig resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides);

struct FitSurrogateOptions {
    fs::path manifest;
    fs::path bounds;
    fs::path samples;
    fs::path out;                    ///< archive file
    std::optional<fs::path> report;  ///< per-station error CSV; defaults next to the archive
    std::optional<int> experiment;   ///< manifest id; first entry when unset
    int order = 2;
    double prune_tau = 1e-4;
    int prune_passes = 5;
    double test_fraction = 0.2;      ///< trailing rows held out for the test error
    DataSpace data_space = DataSpace::linear;
};

struct StationFit {
    std::vector<double> coord;
    double train_error = 0.0;
    double test_error = 0.0; ///< NaN without held-out rows
    std::size_t terms = 0;
    std::size_t failures = 0;
};

struct FitSurrogateOutcome {
    SurrogateArchive archive;
    std::vector<StationFit> stations;
};

/// Samples file: one column per bound parameter (same names, same order) followed by one
/// output column per station of the selected experiment.
FitSurrogateOutcome fit_surrogate_command(const FitSurrogateOptions& options);
std::string format_fit_report_csv(const FitSurrogateOutcome& outcome);

struct SensitivityOptions {
    std::vector<fs::path> archives;
    double threshold = 0.75;
    bool clamp = true;
    fs::path out_dir;
};

/// Writes sensitivity.csv, ranking.csv and retained.txt (one name per line).
TruncationResult sensitivity_command(const SensitivityOptions& options, std::ostream& log);

struct ReduceOptions {
    fs::path bounds;
    std::optional<fs::path> retained; ///< keep only these parameters (file from `sensitivity`)
    std::vector<std::string> copies;  ///< shared parameters to replicate per experiment
    std::vector<int> experiments;
    fs::path out;
};

/// Writes the calibration parameter space.
ParameterSpace reduce_command(const ReduceOptions& options);

struct CalibrationInputs {
    fs::path manifest;
    fs::path bounds;
    std::vector<fs::path> archives;
    CalibrationConfig config;
    fs::path out_dir;
};

/// Loaded and cross-checked inputs shared by the calibration commands.
struct Problem {
    std::vector<DataSummarySet> sets; ///< in the configured data space
    ParameterSpace space;
    std::vector<SurrogateArchive> archives; ///< aligned with sets
    std::vector<Predictor> predictors;
    GaussianPrior prior;
};

Problem load_problem(const CalibrationInputs& inputs);

struct ConsistentDataOutcome {
    std::vector<BetaCalibration> betas;
    bool all_consistent = true;
};

/// Beta search per experiment; writes consistency_<id>.csv, consistency_<id>_stations.csv and
/// synthetic_<id>.csv.
ConsistentDataOutcome consistent_data_command(const CalibrationInputs& inputs, std::ostream& log);

struct CalibrateOutcome {
    ConsistentDataOutcome consistency;
    JointCalibration joint;
};

/// consistent-data followed by the joint calibration; additionally writes chain.csv, map.csv,
/// pushforward_<id>.csv, traces/<name>.csv and run_manifest.txt.
CalibrateOutcome calibrate_command(const CalibrationInputs& inputs, std::ostream& log);

/// Recomputes pushforward_<id>.csv and map.csv from a stored chain.
std::vector<PushforwardSummary> pushforward_command(const CalibrationInputs& inputs, const fs::path& chain_file,
                                                    std::ostream& log);

/// Human-readable summary of a calibration output directory.
std::string report_command(const fs::path& out_dir);

struct DemoOptions {
    fs::path out_dir;
    std::vector<std::string> overrides;
    int experiments = 1;
};

struct DemoOutcome {
    testmodels::SyntheticProblem problem;
    CalibrateOutcome calibration;
    std::vector<double> posterior_sd;
    bool truth_recovered = false; ///< MAP within 3 posterior sd of the truth in every coordinate
};

/// Built-in demo settings (also shipped as configs/demo.cfg).
CalibrationConfig demo_config();
std::vector<double> demo_temperatures();
testmodels::ArrheniusTruth demo_truth();
ParameterSpace demo_space();

/// Generates the Arrhenius problem, fits surrogates, and calibrates, all under out_dir.
DemoOutcome demo_command(const DemoOptions& options, std::ostream& log);

} // namespace dfi::app
