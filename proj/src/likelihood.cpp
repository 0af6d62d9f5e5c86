#include "dfi/likelihood.hpp"

#include "dfi/errors.hpp"

#include <cmath>
#include <numbers>

namespace dfi {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

LogDensity::LogDensity(std::size_t dimension, Function function, std::vector<std::string> labels)
    : dimension_(dimension)
    , function_(std::move(function))
    , labels_(std::move(labels))
{
}

double LogDensity::operator()(std::span<const double> nu) const
{
    if (nu.size() != dimension_) {
        throw ValidationError("log density: expected " + std::to_string(dimension_) + " parameters, got " +
                              std::to_string(nu.size()));
    }
    return function_(nu);
}

double gaussian_loglik(std::span<const double> observations, std::span<const double> predictions,
                       std::span<const double> sigmas)
{
    if (observations.size() != predictions.size() || observations.size() != sigmas.size()) {
        throw ValidationError("gaussian_loglik: length mismatch");
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < observations.size(); ++n) {
        if (!(sigmas[n] > 0.0)) throw ValidationError("gaussian_loglik: sigma must be positive");
        const double r = (observations[n] - predictions[n]) / sigmas[n];
        sum += std::log(two_pi * sigmas[n] * sigmas[n]) + r * r;
    }
    return -0.5 * sum;
}

double pooled_loglik(const SyntheticDataCollection& data, std::span<const double> predictions)
{
    data.validate();
    if (predictions.size() != data.stations()) throw ValidationError("pooled_loglik: prediction length != N");
    double sum = 0.0;
    for (std::size_t n = 0; n < data.stations(); ++n) {
        const double variance = data.beta * data.s[n] * data.s[n];
        double squares = 0.0;
        for (int k = 0; k < data.k; ++k) {
            const double r = data.draws(k, static_cast<Eigen::Index>(n)) - predictions[n];
            squares += r * r;
        }
        sum += std::log(two_pi * variance) + squares / (data.k * variance);
    }
    return -0.5 * sum;
}

PooledLikelihood::PooledLikelihood(const SyntheticDataCollection& data)
{
    data.validate();
    const auto n_stations = data.stations();
    mean_.resize(n_stations);
    spread_.resize(n_stations);
    precision_.resize(n_stations);
    for (std::size_t n = 0; n < n_stations; ++n) {
        const auto column = data.draws.col(static_cast<Eigen::Index>(n));
        const double mean = column.mean();
        const double spread = (column.array() - mean).square().mean();
        const double variance = data.beta * data.s[n] * data.s[n];
        mean_[n] = mean;
        spread_[n] = spread;
        precision_[n] = 1.0 / variance;
        constant_ += -0.5 * std::log(two_pi * variance);
    }
}

double PooledLikelihood::operator()(std::span<const double> predictions) const
{
    if (predictions.size() != mean_.size()) throw ValidationError("pooled likelihood: prediction length != N");
    double quadratic = 0.0;
    for (std::size_t n = 0; n < mean_.size(); ++n) {
        const double r = mean_[n] - predictions[n];
        quadratic += (r * r + spread_[n]) * precision_[n];
    }
    return constant_ - 0.5 * quadratic;
}

std::vector<double> default_weights(std::span<const int> counts)
{
    if (counts.empty()) throw ValidationError("default_weights: no experiments");
    double total = 0.0;
    for (int n : counts) {
        if (n < 1) throw ValidationError("default_weights: station counts must be >= 1");
        total += 1.0 / n;
    }
    std::vector<double> weights;
    weights.reserve(counts.size());
    for (int n : counts) weights.push_back((1.0 / n) / total);
    return weights;
}

LogDensity combined_loglik(const std::vector<SyntheticDataCollection>& collections,
                           const std::vector<Predictor>& predictors, const std::optional<std::vector<double>>& weights)
{
    if (collections.empty()) throw ValidationError("combined_loglik: no experiments");
    if (predictors.size() != collections.size()) throw ValidationError("combined_loglik: one predictor per experiment required");
    const std::size_t dimension = predictors.front().inputs;
    std::vector<PooledLikelihood> pooled;
    std::vector<std::string> labels;
    for (std::size_t d = 0; d < collections.size(); ++d) {
        if (predictors[d].inputs != dimension) throw ValidationError("combined_loglik: predictors disagree on dimension");
        if (predictors[d].outputs != collections[d].stations()) {
            throw ValidationError("combined_loglik: predictor " + std::to_string(d + 1) + " output count != stations");
        }
        pooled.emplace_back(collections[d]);
        labels.push_back("experiment " + std::to_string(collections[d].experiment_id));
    }
    std::vector<double> scale(collections.size(), 1.0);
    if (weights) {
        if (weights->size() != collections.size()) throw ValidationError("combined_loglik: weight/collection count mismatch");
        double total = 0.0;
        for (double w : *weights) {
            if (!(w > 0.0)) throw ValidationError("combined_loglik: weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("combined_loglik: weights must sum to 1");
        const auto count = static_cast<double>(collections.size());
        for (std::size_t d = 0; d < scale.size(); ++d) scale[d] = count * (*weights)[d];
    }
    auto function = [pooled = std::move(pooled), predictors, scale](std::span<const double> nu) {
        double total = 0.0;
        std::vector<double> f;
        for (std::size_t d = 0; d < pooled.size(); ++d) {
            f.resize(predictors[d].outputs);
            predictors[d](nu, f);
            total += scale[d] * pooled[d](f);
        }
        return total;
    };
    return LogDensity(dimension, std::move(function), std::move(labels));
}

double log_prior(const GaussianPrior& prior, std::span<const double> nu)
{
    if (nu.size() != prior.size()) throw ValidationError("log_prior: dimension mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const double z = (nu[j] - prior.mean[j]) / prior.sd[j];
        sum += std::log(two_pi * prior.sd[j] * prior.sd[j]) + z * z;
    }
    return -0.5 * sum;
}

LogDensity prior_density(const GaussianPrior& prior)
{
    return LogDensity(prior.size(), [prior](std::span<const double> nu) { return log_prior(prior, nu); }, {"prior"});
}

LogDensity log_posterior(const GaussianPrior& prior, const LogDensity& likelihood)
{
    if (prior.size() != likelihood.dimension()) throw ValidationError("log_posterior: prior and likelihood dimensions differ");
    auto labels = likelihood.labels();
    labels.insert(labels.begin(), "prior");
    return LogDensity(
        prior.size(), [prior, likelihood](std::span<const double> nu) { return log_prior(prior, nu) + likelihood(nu); },
        std::move(labels));
}

} // namespace dfi
