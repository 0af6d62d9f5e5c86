#include "dfi/testmodels.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"

#include <cmath>
#include <random>

namespace dfi::testmodels {

double arrhenius_eval(double q, double log10w, double temperature)
{
    if (!(temperature > 0.0)) throw ValidationError("arrhenius_eval: temperature must be positive");
    return std::pow(10.0, log10w) * std::exp(-q / (boltzmann_ev * temperature));
}

ArrheniusGradient arrhenius_gradient(double q, double log10w, double temperature)
{
    const double value = arrhenius_eval(q, log10w, temperature);
    return {-value / (boltzmann_ev * temperature), value * std::log(10.0)};
}

SyntheticProblem make_synthetic_problem(const ArrheniusTruth& truth, const std::vector<double>& temperatures,
                                        double noise, int experiments, std::uint64_t seed)
{
    if (temperatures.empty()) throw ValidationError("make_synthetic_problem: no stations");
    if (!(noise > 0.0)) throw ValidationError("make_synthetic_problem: noise fraction must be positive");
    if (experiments < 1) throw ValidationError("make_synthetic_problem: need at least one experiment");
    SyntheticProblem problem;
    problem.truth = truth;
    problem.noise = noise;
    problem.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int d = 0; d < experiments; ++d) {
        DataSummarySet set;
        set.id = d + 1;
        set.label = "arrhenius-" + std::to_string(d + 1);
        set.coord_dim = 1;
        for (double t : temperatures) {
            const double exact = arrhenius_eval(truth.q, truth.log10w_for(static_cast<std::size_t>(d)), t);
            double factor = 0.0;
            do {
                factor = 1.0 + noise * normal(rng);
            } while (factor <= 0.0);
            set.coords.push_back(t);
            set.y.push_back(exact * factor);
            set.s.push_back(noise * exact * factor);
        }
        problem.sets.push_back(std::move(set));
    }
    return problem;
}

ParameterSpace arrhenius_space(double q_lower, double q_upper, double w_lower, double w_upper)
{
    return ParameterSpace({{"Q", 0.5 * (q_lower + q_upper), q_lower, q_upper, "eV"},
                           {"log10w", 0.5 * (w_lower + w_upper), w_lower, w_upper, "log10Hz"}});
}

Predictor arrhenius_predictor(const std::vector<double>& temperatures, double log10w_offset)
{
    for (double t : temperatures) {
        if (!(t > 0.0)) throw ValidationError("arrhenius_predictor: temperature must be positive");
    }
    Predictor p;
    p.inputs = 2;
    p.outputs = temperatures.size();
    p.fn = [temperatures, log10w_offset](std::span<const double> nu, std::span<double> out) {
        for (std::size_t n = 0; n < temperatures.size(); ++n) {
            out[n] = arrhenius_eval(nu[0], nu[1] + log10w_offset, temperatures[n]);
        }
    };
    return p;
}

TrainingSet make_training_set(const ParameterSpace& space, const std::vector<double>& temperatures,
                              std::size_t samples, std::uint64_t seed, double log10w_offset)
{
    if (space.size() != 2) throw ValidationError("make_training_set: expected the (Q, log10w) space");
    TrainingSet set;
    set.inputs.resize(static_cast<Eigen::Index>(samples), 2);
    set.outputs.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(temperatures.size()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto model = arrhenius_predictor(temperatures, log10w_offset);
    for (std::size_t r = 0; r < samples; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t j = 0; j < 2; ++j) {
            set.inputs(row, static_cast<Eigen::Index>(j)) = space[j].lower + unit(rng) * (space[j].upper - space[j].lower);
        }
        model(row_span(set.inputs, row), row_span(set.outputs, row));
    }
    return set;
}

std::string format_training_csv(const ParameterSpace& space, const TrainingSet& set)
{
    std::string out;
    for (const auto& name : space.names()) out += name + ',';
    for (Eigen::Index n = 0; n < set.outputs.cols(); ++n) {
        out += "f" + std::to_string(n + 1) + (n + 1 < set.outputs.cols() ? "," : "\n");
    }
    for (Eigen::Index r = 0; r < set.inputs.rows(); ++r) {
        std::string line;
        for (double v : row_span(set.inputs, r)) line += io::format_double(v) + ',';
        for (Eigen::Index n = 0; n < set.outputs.cols(); ++n) {
            line += io::format_double(set.outputs(r, n)) + (n + 1 < set.outputs.cols() ? "," : "\n");
        }
        out += line;
    }
    return out;
}

std::string format_truth_csv(const ArrheniusTruth& truth)
{
    std::string out = "parameter,value\nQ," + io::format_double(truth.q) + "\nlog10w," + io::format_double(truth.log10w) + '\n';
    for (std::size_t d = 0; d < truth.offsets.size(); ++d) {
        out += "offset" + std::to_string(d + 1) + ',' + io::format_double(truth.offsets[d]) + '\n';
    }
    return out;
}

} // namespace dfi::testmodels
