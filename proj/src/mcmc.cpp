#include "dfi/mcmc.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dfi {

namespace {

// Running mean and scatter matrix of the chain history.
class RunningCovariance {
public:
    explicit RunningCovariance(Eigen::Index dimension)
        : mean_(Eigen::VectorXd::Zero(dimension))
        , scatter_(Eigen::MatrixXd::Zero(dimension, dimension))
    {
    }

    void add(const Eigen::VectorXd& x)
    {
        ++count_;
        const Eigen::VectorXd delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        scatter_.noalias() += delta * (x - mean_).transpose();
    }

    [[nodiscard]] long long count() const noexcept { return count_; }
    [[nodiscard]] Eigen::MatrixXd covariance() const
    {
        return count_ > 1 ? Eigen::MatrixXd(scatter_ / static_cast<double>(count_ - 1))
                          : Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
    }

private:
    long long count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd scatter_;
};

} // namespace

Chain run_chain(const LogDensity& target, std::span<const double> start, const ChainSettings& settings)
{
    const std::size_t s = start.size();
    if (s == 0 || s != target.dimension()) throw ValidationError("run_chain: start dimension does not match target");
    if (settings.steps < 1) throw ValidationError("run_chain: steps must be >= 1");
    if (!(settings.jump > 0.0)) throw ValidationError("run_chain: jump size must be > 0");
    if (settings.adapt_interval < 1) throw ValidationError("run_chain: adapt_interval must be >= 1");
    if (!settings.scales.empty() && settings.scales.size() != s) throw ValidationError("run_chain: scales dimension mismatch");
    if (static_cast<long double>(settings.steps) * static_cast<long double>(s) >
        static_cast<long double>(settings.max_entries)) {
        throw ValidationError("run_chain: steps x dimension exceeds the storage cap of " +
                              std::to_string(settings.max_entries) + " values");
    }

    const auto dim = static_cast<Eigen::Index>(s);
    Eigen::VectorXd current = Eigen::Map<const Eigen::VectorXd>(start.data(), dim);
    double current_lp = target(start);
    if (!std::isfinite(current_lp)) throw NumericalError("run_chain: target is not finite at the starting point");

    const long long adapt_start =
        settings.adapt_start > 0 ? settings.adapt_start : std::max<long long>(1000, 2 * static_cast<long long>(s));

    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double scale = settings.scales.empty() ? 1.0 : settings.scales[static_cast<std::size_t>(j)];
        factor(j, j) = settings.jump * scale;
    }
    Eigen::MatrixXd proposal_cov = factor * factor.transpose();

    Chain chain;
    chain.seed = settings.seed;
    chain.states.resize(settings.steps, dim);
    chain.log_posterior.resize(static_cast<std::size_t>(settings.steps));
    chain.accepted.resize(static_cast<std::size_t>(settings.steps));

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    RunningCovariance history(dim);
    history.add(current);
    const double adapt_scale = 2.38 * 2.38 / static_cast<double>(s);
    bool adapting = false;
    long long since_refactor = 0;

    Eigen::VectorXd eta(dim);
    Eigen::VectorXd proposal(dim);
    for (long long m = 0; m < settings.steps; ++m) {
        if (settings.adapt && history.count() >= adapt_start) {
            if (!adapting || ++since_refactor >= settings.adapt_interval) {
                since_refactor = 0;
                Eigen::MatrixXd cov = adapt_scale * history.covariance();
                cov.diagonal().array() += 1e-10;
                Eigen::LLT<Eigen::MatrixXd> llt(cov);
                if (llt.info() == Eigen::Success) {
                    factor = llt.matrixL();
                    proposal_cov = std::move(cov);
                    adapting = true;
                }
            }
        }
        for (Eigen::Index j = 0; j < dim; ++j) eta(j) = normal(rng);
        proposal.noalias() = current + factor.triangularView<Eigen::Lower>() * eta;
        const double u = uniform(rng);

        const double proposal_lp = target(std::span<const double>(proposal.data(), s));
        const double log_ratio = proposal_lp - current_lp;
        // NaN or -inf proposals fail the comparison and are rejected
        const bool accept = std::log(u) < log_ratio;
        if (accept) {
            current = proposal;
            current_lp = proposal_lp;
            ++chain.acceptances;
        }
        chain.states.row(m) = current.transpose();
        chain.log_posterior[static_cast<std::size_t>(m)] = current_lp;
        chain.accepted[static_cast<std::size_t>(m)] = accept ? 1 : 0;
        history.add(current);
    }
    chain.proposal_covariance = proposal_cov;
    return chain;
}

Matrix postprocess(const Chain& chain, long long burn_in, long long subsample)
{
    const auto steps = static_cast<long long>(chain.size());
    if (burn_in < 0 || burn_in >= steps) throw ValidationError("postprocess: burn-in must be in [0, chain length)");
    if (subsample < 1) throw ValidationError("postprocess: subsample rate must be >= 1");
    const long long kept = (steps - burn_in) / subsample;
    Matrix out(kept, chain.states.cols());
    for (long long r = 0; r < kept; ++r) {
        // 1-based index burn_in + (r + 1) * subsample
        out.row(r) = chain.states.row(burn_in + (r + 1) * subsample - 1);
    }
    return out;
}

MapEstimate map_estimate(const Chain& chain)
{
    if (chain.size() == 0) throw ValidationError("map_estimate: empty chain");
    std::size_t best = 0;
    for (std::size_t m = 1; m < chain.size(); ++m) {
        if (chain.log_posterior[m] > chain.log_posterior[best]) best = m;
    }
    MapEstimate map;
    map.index = best;
    map.log_posterior = chain.log_posterior[best];
    const auto row = row_span(chain.states, static_cast<Eigen::Index>(best));
    map.nu.assign(row.begin(), row.end());
    return map;
}

WarmStartResult warm_start(const LogDensity& target, std::span<const double> start, int iterations,
                           std::span<const double> scales)
{
    const std::size_t s = start.size();
    if (!scales.empty() && scales.size() != s) throw ValidationError("warm_start: scales dimension mismatch");
    auto scale = [&](std::size_t j) { return scales.empty() ? 1.0 : scales[j]; };

    WarmStartResult result;
    result.nu.assign(start.begin(), start.end());
    result.value = target(start);
    if (!std::isfinite(result.value)) throw NumericalError("warm_start: target is not finite at the starting point");

    auto value_at = [&](const std::vector<double>& nu) {
        const double v = target(nu);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    // gradient with respect to the scaled coordinates nu_j / scale_j
    auto gradient = [&](const std::vector<double>& nu) {
        constexpr double h = 1e-5;
        std::vector<double> g(s);
        std::vector<double> probe = nu;
        for (std::size_t j = 0; j < s; ++j) {
            const double step = h * scale(j);
            probe[j] = nu[j] + step;
            const double up = value_at(probe);
            probe[j] = nu[j] - step;
            const double down = value_at(probe);
            probe[j] = nu[j];
            g[j] = (up - down) / (2.0 * h);
        }
        return g;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
        return sum;
    };

    std::vector<double> g = gradient(result.nu);
    double step_length = 1.0 / std::max(1.0, std::sqrt(dot(g, g)));
    bool progressed = false;
    for (int it = 0; it < iterations; ++it) {
        const double g2 = dot(g, g);
        if (!std::isfinite(g2) || g2 == 0.0) break;
        bool improved = false;
        std::vector<double> trial(s);
        double t = step_length;
        for (int attempt = 0; attempt < 60; ++attempt, t *= 0.5) {
            for (std::size_t j = 0; j < s; ++j) trial[j] = result.nu[j] + t * scale(j) * g[j];
            const double v = value_at(trial);
            if (v > result.value) {
                improved = true;
                const auto g_new = gradient(trial);
                // Barzilai-Borwein length from the scaled displacement and gradient change
                double ss = 0.0;
                double sy = 0.0;
                for (std::size_t j = 0; j < s; ++j) {
                    const double dx = t * g[j];
                    ss += dx * dx;
                    sy += dx * (g_new[j] - g[j]);
                }
                step_length = sy < 0.0 ? ss / -sy : 2.0 * t;
                result.nu = trial;
                result.value = v;
                g = g_new;
                break;
            }
        }
        ++result.iterations;
        if (!improved) break;
        progressed = true;
    }
    result.stalled = !progressed && iterations > 0;
    return result;
}

std::string format_chain_csv(const Chain& chain, const std::vector<std::string>& names)
{
    if (names.size() != chain.dimension()) throw ValidationError("format_chain_csv: name count != dimension");
    std::string out = "iter,logpost";
    for (const auto& n : names) out += ',' + n;
    out += '\n';
    for (std::size_t m = 0; m < chain.size(); ++m) {
        out += std::to_string(m + 1) + ',' + io::format_double(chain.log_posterior[m]);
        for (double v : row_span(chain.states, static_cast<Eigen::Index>(m))) out += ',' + io::format_double(v);
        out += '\n';
    }
    return out;
}

Chain parse_chain_csv(std::string_view text, std::string_view source_name, std::vector<std::string>* names)
{
    const auto table = io::parse_csv(text, source_name);
    if (table.header.size() < 3 || table.header[0] != "iter" || table.header[1] != "logpost") {
        throw ValidationError(std::string(source_name) + ": header must be 'iter,logpost,<parameters>'");
    }
    const std::size_t s = table.header.size() - 2;
    if (names) names->assign(table.header.begin() + 2, table.header.end());
    Chain chain;
    chain.states.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(s));
    for (std::size_t m = 0; m < table.rows.size(); ++m) {
        const auto& row = table.rows[m];
        const std::string where = std::string(source_name) + " row " + std::to_string(row.line);
        if (row.fields.size() != s + 2) throw ValidationError(where + ": malformed row");
        chain.log_posterior.push_back(io::parse_double(row.fields[1], where));
        for (std::size_t j = 0; j < s; ++j) {
            chain.states(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = io::parse_double(row.fields[j + 2], where);
        }
        const bool moved = m > 0 && chain.states.row(static_cast<Eigen::Index>(m)) != chain.states.row(static_cast<Eigen::Index>(m - 1));
        chain.accepted.push_back(moved ? 1 : 0);
        chain.acceptances += moved ? 1 : 0;
    }
    return chain;
}

} // namespace dfi
