#pragma once

#include "dfi/core_types.hpp"
#include "dfi/predictor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dfi::testmodels {

inline constexpr double boltzmann_ev = 8.617333262e-5; // eV/K

/// 10^log10w * exp(-Q / (k_B T)). Throws ValidationError for T <= 0.
double arrhenius_eval(double q, double log10w, double temperature);

struct ArrheniusGradient {
    double d_q = 0.0;
    double d_log10w = 0.0;
};
ArrheniusGradient arrhenius_gradient(double q, double log10w, double temperature);

struct ArrheniusTruth {
    double q = 1.0;
    double log10w = 0.0;
    /// Added to log10w for experiment d when non-empty.
    std::vector<double> offsets;

    [[nodiscard]] double log10w_for(std::size_t experiment) const
    {
        return log10w + (experiment < offsets.size() ? offsets[experiment] : 0.0);
    }
};

struct SyntheticProblem {
    std::vector<DataSummarySet> sets; ///< ids 1..D, stations at the given temperatures
    ArrheniusTruth truth;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

/// y_n = model(T_n) (1 + noise eta_n) with eta_n standard normal, redrawn until the factor is
/// positive; s_n = noise y_n.
SyntheticProblem make_synthetic_problem(const ArrheniusTruth& truth, const std::vector<double>& temperatures,
                                        double noise, int experiments, std::uint64_t seed);

/// Parameters (Q, log10w) over the given bounds.
ParameterSpace arrhenius_space(double q_lower, double q_upper, double w_lower, double w_upper);

/// Exact model over (Q, log10w) at fixed temperatures.
Predictor arrhenius_predictor(const std::vector<double>& temperatures, double log10w_offset = 0.0);

/// Uniform samples over `space` and the exact model output at each temperature.
struct TrainingSet {
    Matrix inputs;  ///< samples x 2
    Matrix outputs; ///< samples x stations
};
TrainingSet make_training_set(const ParameterSpace& space, const std::vector<double>& temperatures,
                              std::size_t samples, std::uint64_t seed, double log10w_offset = 0.0);

/// CSV with the parameter columns followed by one output column per station.
std::string format_training_csv(const ParameterSpace& space, const TrainingSet& set);

std::string format_truth_csv(const ArrheniusTruth& truth);

} // namespace dfi::testmodels
