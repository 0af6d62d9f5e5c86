#pragma once

#include "dfi/likelihood.hpp"
#include "dfi/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dfi {

struct ChainSettings {
    long long steps = 10'000;
    /// Pre-adaptation proposal sd for coordinate j is jump * scales[j].
    double jump = 0.5;
    /// Per-coordinate proposal scale, typically (b_j - a_j) / 6. Empty means all ones.
    std::vector<double> scales;
    bool adapt = true;
    /// Adaptation begins once this many states are in the history; 0 selects max(1000, 2s).
    long long adapt_start = 0;
    /// Steps between refactorizations of the adapted covariance.
    long long adapt_interval = 1;
    std::uint64_t seed = 0;
    /// Upper bound on steps * dimension stored in memory.
    std::size_t max_entries = std::size_t{1} << 28;
};

struct Chain {
    Matrix states;                      ///< steps x s; row m is the state after step m + 1
    std::vector<double> log_posterior;  ///< one entry per row of `states`
    std::vector<std::uint8_t> accepted; ///< one flag per step
    long long acceptances = 0;
    std::uint64_t seed = 0;
    Matrix proposal_covariance;         ///< covariance in use at the final step

    [[nodiscard]] std::size_t size() const noexcept { return log_posterior.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(states.cols()); }
    [[nodiscard]] double acceptance_rate() const noexcept
    {
        return accepted.empty() ? 0.0 : static_cast<double>(acceptances) / static_cast<double>(accepted.size());
    }
};

/// Random-walk Metropolis with Gaussian proposals. Before adaptation the proposal covariance is
/// diag(jump * scales)^2; afterwards (2.38^2 / s) * Cov(history) + 1e-10 I, with the history
/// covariance updated one state at a time. Deterministic given the seed.
/// Throws NumericalError when the target is not finite at `start`.
Chain run_chain(const LogDensity& target, std::span<const double> start, const ChainSettings& settings);

/// Keeps 1-based step indices i with i > burn_in and (i - burn_in) % subsample == 0.
Matrix postprocess(const Chain& chain, long long burn_in, long long subsample);

struct MapEstimate {
    std::vector<double> nu;
    double log_posterior = 0.0;
    std::size_t index = 0; ///< 0-based row in the chain
};

/// Highest recorded log posterior; earliest on ties.
MapEstimate map_estimate(const Chain& chain);

struct WarmStartResult {
    std::vector<double> nu;
    double value = 0.0;
    int iterations = 0;
    bool stalled = false; ///< no improving step was found from the start point
};

/// Deterministic ascent: central finite-difference gradients in coordinates scaled by `scales`,
/// Barzilai-Borwein step lengths with backtracking, improving steps only.
WarmStartResult warm_start(const LogDensity& target, std::span<const double> start, int iterations,
                           std::span<const double> scales = {});

/// CSV `iter,logpost,<names...>`.
std::string format_chain_csv(const Chain& chain, const std::vector<std::string>& names);
Chain parse_chain_csv(std::string_view text, std::string_view source_name, std::vector<std::string>* names = nullptr);

} // namespace dfi
