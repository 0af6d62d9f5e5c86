#pragma once

#include "dfi/core_types.hpp"
#include "dfi/predictor.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfi {

/// Log density up to an additive constant. Pure and reentrant.
class LogDensity {
public:
    using Function = std::function<double(std::span<const double>)>;

    LogDensity() = default;
    LogDensity(std::size_t dimension, Function function, std::vector<std::string> labels = {});

    /// Throws ValidationError on dimension mismatch.
    double operator()(std::span<const double> nu) const;
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    std::size_t dimension_ = 0;
    Function function_;
    std::vector<std::string> labels_;
};

/// -1/2 sum [ log(2 pi sigma^2) + (q - f)^2 / sigma^2 ].
double gaussian_loglik(std::span<const double> observations, std::span<const double> predictions,
                       std::span<const double> sigmas);

/// Log-pooled likelihood of K synthetic sets, evaluated term by term over the K x N draws.
double pooled_loglik(const SyntheticDataCollection& data, std::span<const double> predictions);

/// The same density through per-station sufficient statistics:
/// (1/K) sum_k (z_k - f)^2 = (zbar - f)^2 + mean squared deviation, so each call is O(N).
class PooledLikelihood {
public:
    explicit PooledLikelihood(const SyntheticDataCollection& data);
    double operator()(std::span<const double> predictions) const;
    [[nodiscard]] std::size_t stations() const noexcept { return mean_.size(); }

private:
    std::vector<double> mean_;
    std::vector<double> spread_;    ///< (1/K) sum_k (z_k - zbar)^2
    std::vector<double> precision_; ///< 1 / (beta s^2)
    double constant_ = 0.0;         ///< -1/2 sum log(2 pi beta s^2)
};

/// alpha_d = N_d^-1 / sum N^-1.
std::vector<double> default_weights(std::span<const int> counts);

/// Unweighted: sum_d l_d. Weighted: sum_d (D alpha_d) l_d, so uniform weights reproduce the
/// unweighted value. `predictors[d]` maps the full parameter vector to experiment d's stations.
LogDensity combined_loglik(const std::vector<SyntheticDataCollection>& collections,
                           const std::vector<Predictor>& predictors,
                           const std::optional<std::vector<double>>& weights = std::nullopt);

double log_prior(const GaussianPrior& prior, std::span<const double> nu);
LogDensity prior_density(const GaussianPrior& prior);

/// Pointwise log prior + log likelihood.
LogDensity log_posterior(const GaussianPrior& prior, const LogDensity& likelihood);

} // namespace dfi
