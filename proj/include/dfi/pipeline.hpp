#pragma once

#include "dfi/archive.hpp"
#include "dfi/core_types.hpp"
#include "dfi/likelihood.hpp"
#include "dfi/mcmc.hpp"
#include "dfi/predictor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfi {

/// z(k, n) = y_n + sqrt(beta) s_n eta(k, n), eta standard normal drawn row by row.
/// Throws ValidationError for beta <= 0 or K < 1.
SyntheticDataCollection draw_synthetic(const DataSummarySet& set, double beta, int k, std::uint64_t seed);

/// Row m, column n: predictor output at station n for sample m.
Matrix pushforward(const Matrix& samples, const Predictor& predictor);

/// 3 x unbiased standard deviation per column. Requires at least two rows.
std::vector<double> pushforward_stat(const Matrix& pushed, std::string_view kind = "3sigma");

/// ||s - s_tilde|| / ||s||.
double consistency_distance(std::span<const double> reported, std::span<const double> computed);

struct SamplerSettings {
    long long steps = 10'000;
    double jump = 0.5;
    long long burn_in = 1'000;
    long long subsample = 1;
    bool adapt = true;
    long long adapt_start = 0;
    int warm_start_iterations = 50;
    std::size_t max_entries = std::size_t{1} << 28;
};

SamplerSettings sampler_settings(const CalibrationConfig& config);

struct BetaCandidate {
    double beta = 0.0;
    double rho = 0.0;            ///< NaN when the candidate failed
    std::size_t retained = 0;
    std::uint64_t seed = 0;      ///< chain seed
    double acceptance = 0.0;
    bool failed = false;
    std::string failure;
    std::vector<double> s_tilde;
};

struct ConsistencyReport {
    int experiment_id = 0;
    std::uint64_t data_seed = 0; ///< shared by every candidate
    std::vector<BetaCandidate> candidates;
    std::size_t selected = 0;
    double epsilon = 0.0;
    bool consistent = false;
    std::vector<double> reported_s;

    [[nodiscard]] const BetaCandidate& best() const { return candidates.at(selected); }
};

struct BetaCalibration {
    ConsistencyReport report;
    SyntheticDataCollection collection; ///< synthetic data at the selected beta
};

/// Everything calibrate_beta needs besides the grid.
struct InferenceSetup {
    GaussianPrior prior;
    std::vector<double> start;  ///< nu_0 before warm start
    std::vector<double> scales; ///< proposal and warm-start scale per coordinate
    SamplerSettings sampler;
    int k = 100;
    double epsilon = 0.2;
    std::uint64_t master_seed = 1;
};

/// Grid search over beta. Every candidate reuses the synthetic-data seed and the chain seed,
/// so candidates differ only through beta. The smallest rho wins; ties go to grid order.
/// Failed candidates are reported and skipped; throws NumericalError if all fail.
BetaCalibration calibrate_beta(const DataSummarySet& set, std::span<const double> grid, const Predictor& predictor,
                               const InferenceSetup& setup);

struct PushforwardSummary {
    int experiment_id = 0;
    std::size_t samples = 0;
    std::size_t coord_dim = 1;
    std::vector<double> coords;
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<double> three_sigma;
    std::vector<double> map_pred;
    std::vector<double> y;
    std::vector<double> s;
};

PushforwardSummary summarize_pushforward(const Matrix& pushed, std::span<const double> map_prediction,
                                         const DataSummarySet& set);

struct JointCalibration {
    Chain chain;
    Matrix retained;
    MapEstimate map;
    std::vector<double> start;
    bool warm_start_stalled = false;
    std::vector<PushforwardSummary> summaries;
};

/// MCMC on prior + combined log-likelihood over all experiments.
JointCalibration joint_calibrate(const std::vector<SyntheticDataCollection>& collections,
                                 const std::vector<DataSummarySet>& sets, const std::vector<Predictor>& predictors,
                                 WeightMode weights, const InferenceSetup& setup);

/// Parameter space with per-experiment copies `name@id` of the shared parameters. Originals are
/// removed and the copies appended in (name, experiment) order.
struct ExperimentCopies {
    ParameterSpace space;
    std::vector<std::string> shared;
    std::vector<int> experiments;
    /// binding[d][j]: index into `space` of original parameter j as seen by experiment d.
    std::vector<std::vector<std::size_t>> binding;

    [[nodiscard]] std::vector<double> project(std::size_t experiment_position, std::span<const double> nu) const;
};

ExperimentCopies experiment_specific_copies(const ParameterSpace& space, const std::vector<std::string>& shared,
                                            const std::vector<int>& experiments);

/// Predictor over the calibration space evaluating the archive's surrogates at the stations of
/// `set`. Archive parameter `n` binds to `n@<id>` when present, otherwise to `n`; archive
/// parameters missing from the calibration space are held at their nominal values.
/// Throws ValidationError for stations outside the archive's coordinate range.
Predictor surrogate_predictor(const SurrogateArchive& archive, const DataSummarySet& set,
                              const ParameterSpace& calibration_space);

std::string format_consistency_csv(const ConsistencyReport& report);
std::string format_consistency_stations_csv(const ConsistencyReport& report, const DataSummarySet& set);
std::string format_pushforward_csv(const PushforwardSummary& summary);
std::string format_synthetic_csv(const SyntheticDataCollection& collection);
/// One row per retained iteration: `iter,scaled` with 2 (nu - a) / (b - a) - 1.
std::string format_trace_csv(const Chain& chain, const ParameterSpace& space, std::size_t parameter, long long stride);
std::string format_map_csv(const MapEstimate& map, const ParameterSpace& space, const Matrix& retained);

} // namespace dfi
