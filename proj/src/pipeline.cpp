#include "dfi/pipeline.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"
#include "dfi/kernels.hpp"
#include "dfi/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace dfi {

SyntheticDataCollection draw_synthetic(const DataSummarySet& set, double beta, int k, std::uint64_t seed)
{
    if (!(beta > 0.0)) throw ValidationError("draw_synthetic: beta must be positive");
    if (k < 1) throw ValidationError("draw_synthetic: K must be >= 1");
    set.validate();
    const std::size_t n_stations = set.size();
    SyntheticDataCollection out;
    out.experiment_id = set.id;
    out.k = k;
    out.beta = beta;
    out.seed = seed;
    out.s = set.s;
    out.draws.resize(k, static_cast<Eigen::Index>(n_stations));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double root_beta = std::sqrt(beta);
    for (int r = 0; r < k; ++r) {
        for (std::size_t n = 0; n < n_stations; ++n) {
            out.draws(r, static_cast<Eigen::Index>(n)) = set.y[n] + root_beta * set.s[n] * normal(rng);
        }
    }
    return out;
}

Matrix pushforward(const Matrix& samples, const Predictor& predictor)
{
    if (static_cast<std::size_t>(samples.cols()) != predictor.inputs) {
        throw ValidationError("pushforward: sample dimension does not match the predictor");
    }
    return kernels::pushforward(samples, predictor);
}

std::vector<double> pushforward_stat(const Matrix& pushed, std::string_view kind)
{
    if (kind != "3sigma") throw ValidationError("pushforward_stat: unknown statistic '" + std::string(kind) + "'");
    const Eigen::Index m = pushed.rows();
    if (m < 2) throw ValidationError("pushforward_stat: need at least 2 samples per station");
    std::vector<double> out(static_cast<std::size_t>(pushed.cols()));
    for (Eigen::Index n = 0; n < pushed.cols(); ++n) {
        double mean = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) mean += pushed(r, n);
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) {
            const double d = pushed(r, n) - mean;
            ss += d * d;
        }
        out[static_cast<std::size_t>(n)] = 3.0 * std::sqrt(ss / static_cast<double>(m - 1));
    }
    return out;
}

double consistency_distance(std::span<const double> reported, std::span<const double> computed)
{
    if (reported.size() != computed.size()) throw ValidationError("consistency_distance: length mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t n = 0; n < reported.size(); ++n) {
        num += (reported[n] - computed[n]) * (reported[n] - computed[n]);
        den += reported[n] * reported[n];
    }
    if (den == 0.0) throw ValidationError("consistency_distance: reported uncertainties have zero norm");
    return std::sqrt(num / den);
}

SamplerSettings sampler_settings(const CalibrationConfig& config)
{
    SamplerSettings out;
    out.steps = config.mcmc_steps;
    out.jump = config.jump;
    out.burn_in = config.burn_in;
    out.subsample = config.subsample;
    out.adapt = config.adapt;
    out.adapt_start = config.adapt_start;
    out.warm_start_iterations = config.warm_start_iterations;
    return out;
}

namespace {

LogDensity likelihood_of(const SyntheticDataCollection& collection, const Predictor& predictor)
{
    auto pooled = std::make_shared<PooledLikelihood>(collection);
    return LogDensity(predictor.inputs, [pooled, predictor](std::span<const double> nu) {
        std::vector<double> f(predictor.outputs);
        predictor(nu, f);
        return (*pooled)(f);
    });
}

struct SampledPosterior {
    Chain chain;
    Matrix retained;
    std::vector<double> start;
    bool stalled = false;
};

SampledPosterior sample_posterior(const LogDensity& posterior, const InferenceSetup& setup, std::uint64_t seed)
{
    SampledPosterior out;
    const auto warm = warm_start(posterior, setup.start, setup.sampler.warm_start_iterations, setup.scales);
    out.start = warm.nu;
    out.stalled = warm.stalled;
    ChainSettings cs;
    cs.steps = setup.sampler.steps;
    cs.jump = setup.sampler.jump;
    cs.scales = setup.scales;
    cs.adapt = setup.sampler.adapt;
    cs.adapt_start = setup.sampler.adapt_start;
    cs.seed = seed;
    cs.max_entries = setup.sampler.max_entries;
    out.chain = run_chain(posterior, out.start, cs);
    out.retained = postprocess(out.chain, setup.sampler.burn_in, setup.sampler.subsample);
    return out;
}

} // namespace

BetaCalibration calibrate_beta(const DataSummarySet& set, std::span<const double> grid, const Predictor& predictor,
                               const InferenceSetup& setup)
{
    if (grid.empty()) throw ValidationError("calibrate_beta: empty beta grid");
    for (double b : grid) {
        if (!(b > 0.0)) throw ValidationError("calibrate_beta: beta grid values must be positive");
    }
    set.validate();
    if (predictor.outputs != set.size()) throw ValidationError("calibrate_beta: predictor/station count mismatch");
    if (setup.prior.size() != predictor.inputs || setup.start.size() != predictor.inputs) {
        throw ValidationError("calibrate_beta: prior, start and predictor dimensions differ");
    }

    BetaCalibration result;
    auto& report = result.report;
    report.experiment_id = set.id;
    report.epsilon = setup.epsilon;
    report.reported_s = set.s;
    report.data_seed = derive_seed(setup.master_seed, "synthetic", static_cast<std::uint64_t>(set.id));
    const std::uint64_t chain_seed = derive_seed(setup.master_seed, "beta-chain", static_cast<std::uint64_t>(set.id));

    report.candidates.resize(grid.size());
    const auto n_candidates = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n_candidates; ++i) {
        auto& cand = report.candidates[static_cast<std::size_t>(i)];
        cand.beta = grid[static_cast<std::size_t>(i)];
        cand.seed = chain_seed;
        try {
            const auto collection = draw_synthetic(set, cand.beta, setup.k, report.data_seed);
            const auto posterior = log_posterior(setup.prior, likelihood_of(collection, predictor));
            const auto sampled = sample_posterior(posterior, setup, chain_seed);
            const Matrix pushed = kernels::serial::pushforward(sampled.retained, predictor);
            cand.retained = static_cast<std::size_t>(sampled.retained.rows());
            cand.acceptance = sampled.chain.acceptance_rate();
            cand.s_tilde = pushforward_stat(pushed);
            cand.rho = consistency_distance(set.s, cand.s_tilde);
            if (!std::isfinite(cand.rho)) throw NumericalError("non-finite consistency distance");
        } catch (const std::exception& e) {
            cand.failed = true;
            cand.failure = e.what();
            cand.rho = std::numeric_limits<double>::quiet_NaN();
        }
    }

    bool any = false;
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        const auto& c = report.candidates[i];
        if (c.failed) continue;
        if (!any || c.rho < report.candidates[report.selected].rho) report.selected = i;
        any = true;
    }
    if (!any) {
        throw NumericalError("calibrate_beta: every beta candidate failed for experiment " + std::to_string(set.id) +
                             " (first failure: " + report.candidates.front().failure + ")");
    }
    report.consistent = report.best().rho <= setup.epsilon;
    result.collection = draw_synthetic(set, report.best().beta, setup.k, report.data_seed);
    return result;
}

PushforwardSummary summarize_pushforward(const Matrix& pushed, std::span<const double> map_prediction,
                                         const DataSummarySet& set)
{
    if (static_cast<std::size_t>(pushed.cols()) != set.size() || map_prediction.size() != set.size()) {
        throw ValidationError("summarize_pushforward: station count mismatch");
    }
    PushforwardSummary out;
    out.experiment_id = set.id;
    out.samples = static_cast<std::size_t>(pushed.rows());
    out.coord_dim = set.coord_dim;
    out.coords = set.coords;
    out.y = set.y;
    out.s = set.s;
    out.map_pred.assign(map_prediction.begin(), map_prediction.end());
    out.three_sigma = pushforward_stat(pushed);
    for (Eigen::Index n = 0; n < pushed.cols(); ++n) {
        double mean = 0.0;
        for (Eigen::Index r = 0; r < pushed.rows(); ++r) mean += pushed(r, n);
        out.mean.push_back(mean / static_cast<double>(pushed.rows()));
        out.sd.push_back(out.three_sigma[static_cast<std::size_t>(n)] / 3.0);
    }
    return out;
}

JointCalibration joint_calibrate(const std::vector<SyntheticDataCollection>& collections,
                                 const std::vector<DataSummarySet>& sets, const std::vector<Predictor>& predictors,
                                 WeightMode weights, const InferenceSetup& setup)
{
    if (collections.empty() || collections.size() != sets.size() || sets.size() != predictors.size()) {
        throw ValidationError("joint_calibrate: need one collection, data set and predictor per experiment");
    }
    std::optional<std::vector<double>> alpha;
    if (weights == WeightMode::uniform) {
        alpha = std::vector<double>(collections.size(), 1.0 / static_cast<double>(collections.size()));
    } else if (weights == WeightMode::inverse_count) {
        std::vector<int> counts;
        for (const auto& c : collections) counts.push_back(static_cast<int>(c.stations()));
        alpha = default_weights(counts);
    }
    const auto posterior = log_posterior(setup.prior, combined_loglik(collections, predictors, alpha));
    auto sampled = sample_posterior(posterior, setup, derive_seed(setup.master_seed, "joint-chain"));

    JointCalibration out;
    out.start = sampled.start;
    out.warm_start_stalled = sampled.stalled;
    out.map = map_estimate(sampled.chain);
    for (std::size_t d = 0; d < sets.size(); ++d) {
        const Matrix pushed = pushforward(sampled.retained, predictors[d]);
        out.summaries.push_back(summarize_pushforward(pushed, predictors[d](out.map.nu), sets[d]));
    }
    out.chain = std::move(sampled.chain);
    out.retained = std::move(sampled.retained);
    return out;
}

std::vector<double> ExperimentCopies::project(std::size_t experiment_position, std::span<const double> nu) const
{
    if (nu.size() != space.size()) throw ValidationError("project: dimension mismatch");
    const auto& map = binding.at(experiment_position);
    std::vector<double> out(map.size());
    for (std::size_t j = 0; j < map.size(); ++j) out[j] = nu[map[j]];
    return out;
}

ExperimentCopies experiment_specific_copies(const ParameterSpace& space, const std::vector<std::string>& shared,
                                            const std::vector<int>& experiments)
{
    std::set<std::string> shared_set;
    for (const auto& name : shared) {
        if (!space.index_of(name)) throw ValidationError("experiment_specific_copies: unknown parameter '" + name + "'");
        if (!shared_set.insert(name).second) {
            throw ValidationError("experiment_specific_copies: parameter '" + name + "' listed twice");
        }
    }
    if (std::set<int>(experiments.begin(), experiments.end()).size() != experiments.size()) {
        throw ValidationError("experiment_specific_copies: duplicate experiment id");
    }
    if (!shared.empty() && experiments.empty()) {
        throw ValidationError("experiment_specific_copies: copies requested without experiments");
    }

    std::vector<Parameter> entries;
    for (const auto& p : space.entries()) {
        if (!shared_set.count(p.name)) entries.push_back(p);
    }
    for (const auto& name : shared) {
        for (int id : experiments) {
            Parameter copy = space[*space.index_of(name)];
            copy.name = name + "@" + std::to_string(id);
            entries.push_back(std::move(copy));
        }
    }

    ExperimentCopies out;
    out.space = ParameterSpace(std::move(entries));
    out.shared = shared;
    out.experiments = experiments;
    const std::size_t n_rows = experiments.empty() ? 1 : experiments.size();
    for (std::size_t d = 0; d < n_rows; ++d) {
        std::vector<std::size_t> map;
        for (const auto& p : space.entries()) {
            const std::string name = shared_set.count(p.name) ? p.name + "@" + std::to_string(experiments[d]) : p.name;
            map.push_back(*out.space.index_of(name));
        }
        out.binding.push_back(std::move(map));
    }
    return out;
}

Predictor surrogate_predictor(const SurrogateArchive& archive, const DataSummarySet& set,
                              const ParameterSpace& calibration_space)
{
    set.validate();
    if (set.coord_dim != archive.coord_dim) {
        throw ValidationError("experiment " + std::to_string(set.id) + ": station coordinate dimension differs from archive");
    }
    const auto& arch_space = archive.parameters;
    constexpr std::size_t fixed = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> source(arch_space.size(), fixed);
    std::vector<double> nominal = arch_space.nominal();
    for (std::size_t j = 0; j < arch_space.size(); ++j) {
        const auto& name = arch_space[j].name;
        if (auto idx = calibration_space.index_of(name + "@" + std::to_string(archive.experiment_id))) {
            source[j] = *idx;
        } else if (auto idx2 = calibration_space.index_of(name)) {
            source[j] = *idx2;
        }
    }
    std::vector<PceSurrogate> station_models;
    int max_degree = 0;
    for (std::size_t n = 0; n < set.size(); ++n) {
        try {
            station_models.push_back(archive.at(set.coord(n)));
        } catch (const ValidationError& e) {
            throw ValidationError("experiment " + std::to_string(set.id) + " station " + std::to_string(n + 1) + ": " +
                                  e.what());
        }
        max_degree = std::max(max_degree, station_models.back().max_degree());
    }

    Predictor p;
    p.inputs = calibration_space.size();
    p.outputs = set.size();
    p.fn = [arch_space, source, nominal, models = std::move(station_models), max_degree](std::span<const double> nu,
                                                                                          std::span<double> out) {
        std::vector<double> full(source.size());
        for (std::size_t j = 0; j < source.size(); ++j) full[j] = source[j] == fixed ? nominal[j] : nu[source[j]];
        const LegendreTable table(arch_space.to_reference(full), max_degree);
        for (std::size_t n = 0; n < models.size(); ++n) out[n] = models[n].evaluate(table);
    };
    return p;
}

namespace {

std::string coord_header(std::size_t coord_dim)
{
    return coord_dim == 1 ? std::string("coord1") : std::string("coord1,coord2");
}

} // namespace

std::string format_consistency_csv(const ConsistencyReport& report)
{
    std::string out = "beta,rho,accepted_flag\n";
    for (const auto& c : report.candidates) {
        const bool ok = !c.failed && c.rho <= report.epsilon;
        out += io::format_double(c.beta) + ',' + io::format_double(c.rho) + ',' + (ok ? "1" : "0") + '\n';
    }
    return out;
}

std::string format_consistency_stations_csv(const ConsistencyReport& report, const DataSummarySet& set)
{
    const auto& best = report.best();
    std::string out = "station," + coord_header(set.coord_dim) + ",s,s_tilde\n";
    for (std::size_t n = 0; n < set.size(); ++n) {
        out += std::to_string(n + 1);
        for (double c : set.coord(n)) out += ',' + io::format_double(c);
        out += ',' + io::format_double(set.s[n]) + ',' + io::format_double(best.s_tilde[n]) + '\n';
    }
    return out;
}

std::string format_pushforward_csv(const PushforwardSummary& summary)
{
    std::string out = "station," + coord_header(summary.coord_dim) + ",mean,sd,three_sigma,map_pred,y,s\n";
    for (std::size_t n = 0; n < summary.mean.size(); ++n) {
        out += std::to_string(n + 1);
        for (std::size_t c = 0; c < summary.coord_dim; ++c) {
            out += ',' + io::format_double(summary.coords[n * summary.coord_dim + c]);
        }
        for (double v : {summary.mean[n], summary.sd[n], summary.three_sigma[n], summary.map_pred[n], summary.y[n],
                         summary.s[n]}) {
            out += ',' + io::format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string format_synthetic_csv(const SyntheticDataCollection& collection)
{
    std::string out = "replicate";
    for (std::size_t n = 0; n < collection.stations(); ++n) out += ",z" + std::to_string(n + 1);
    out += '\n';
    for (Eigen::Index r = 0; r < collection.draws.rows(); ++r) {
        out += std::to_string(r + 1);
        for (double v : row_span(collection.draws, r)) out += ',' + io::format_double(v);
        out += '\n';
    }
    return out;
}

std::string format_trace_csv(const Chain& chain, const ParameterSpace& space, std::size_t parameter, long long stride)
{
    if (parameter >= space.size() || space.size() != chain.dimension()) {
        throw ValidationError("format_trace_csv: parameter index out of range");
    }
    if (stride < 1) throw ValidationError("format_trace_csv: stride must be >= 1");
    const auto& p = space[parameter];
    std::string out = "iter,scaled\n";
    for (std::size_t m = static_cast<std::size_t>(stride) - 1; m < chain.size(); m += static_cast<std::size_t>(stride)) {
        const double nu = chain.states(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(parameter));
        out += std::to_string(m + 1) + ',' + io::format_double(scale_to_reference(nu, p.lower, p.upper)) + '\n';
    }
    return out;
}

std::string format_map_csv(const MapEstimate& map, const ParameterSpace& space, const Matrix& retained)
{
    if (map.nu.size() != space.size() || static_cast<std::size_t>(retained.cols()) != space.size()) {
        throw ValidationError("format_map_csv: dimension mismatch");
    }
    std::string out = "# log_posterior " + io::format_double(map.log_posterior) + " at iteration " +
                      std::to_string(map.index + 1) + '\n';
    out += "parameter,map,mean,sd\n";
    const auto m = static_cast<double>(retained.rows());
    for (std::size_t j = 0; j < space.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        double mean = 0.0;
        for (Eigen::Index r = 0; r < retained.rows(); ++r) mean += retained(r, col);
        mean /= m;
        double ss = 0.0;
        for (Eigen::Index r = 0; r < retained.rows(); ++r) ss += (retained(r, col) - mean) * (retained(r, col) - mean);
        const double sd = retained.rows() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
        out += space[j].name + ',' + io::format_double(map.nu[j]) + ',' + io::format_double(mean) + ',' +
               io::format_double(sd) + '\n';
    }
    return out;
}

} // namespace dfi
