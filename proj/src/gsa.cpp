#include "dfi/gsa.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"
#include "dfi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dfi {

SobolResult total_sobol(const PceSurrogate& surrogate)
{
    SobolResult result;
    result.total.assign(surrogate.dimension(), 0.0);
    double variance = 0.0;
    const auto& indices = surrogate.indices();
    const auto& coefficients = surrogate.coefficients();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i].is_constant()) continue;
        const double c2 = coefficients[i] * coefficients[i];
        variance += c2;
        for (std::size_t j = 0; j < indices[i].size(); ++j) {
            if (indices[i][j] > 0) result.total[j] += c2;
        }
    }
    if (!(variance > 0.0)) {
        result.zero_variance = true;
        std::fill(result.total.begin(), result.total.end(), 0.0);
        return result;
    }
    for (double& t : result.total) t /= variance;
    return result;
}

std::vector<double> SensitivityTable::max_over_stations() const
{
    std::vector<double> out(parameters.size(), 0.0);
    for (const auto& row : indices) {
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::max(out[j], row[j]);
    }
    return out;
}

SensitivityTable sensitivity_table(const SurrogateArchive& archive, const std::optional<std::vector<std::string>>& active)
{
    SensitivityTable table;
    table.experiment_id = archive.experiment_id;
    table.parameters = archive.parameters.names();
    std::vector<bool> mask(table.parameters.size(), true);
    if (active) {
        std::fill(mask.begin(), mask.end(), false);
        for (const auto& name : *active) {
            const auto j = archive.parameters.index_of(name);
            if (!j) throw ValidationError("sensitivity: unknown active parameter '" + name + "'");
            mask[*j] = true;
        }
    }
    for (std::size_t i = 0; i < archive.stations(); ++i) {
        auto sobol = total_sobol(archive.surrogates[i]);
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (!mask[j]) sobol.total[j] = 0.0;
        }
        const auto c = archive.coord(i);
        table.station_coords.emplace_back(c.begin(), c.end());
        table.indices.push_back(std::move(sobol.total));
        table.zero_variance.push_back(sobol.zero_variance);
    }
    return table;
}

TruncationResult rank_and_truncate(const std::vector<SensitivityTable>& tables, double theta, bool clamp)
{
    if (!(theta > 0.0) || theta > 1.0) throw ValidationError("rank_and_truncate: threshold must be in (0, 1]");
    if (tables.empty()) throw ValidationError("rank_and_truncate: no sensitivity tables");

    // union of parameter names, in order of first appearance
    std::vector<std::string> names;
    for (const auto& t : tables) {
        for (const auto& n : t.parameters) {
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        }
    }
    // per experiment max-over-stations, aligned to `names`
    std::vector<std::vector<double>> per_experiment;
    for (const auto& t : tables) {
        const auto maxes = t.max_over_stations();
        std::vector<double> aligned(names.size(), 0.0);
        for (std::size_t j = 0; j < t.parameters.size(); ++j) {
            const auto pos = static_cast<std::size_t>(std::find(names.begin(), names.end(), t.parameters[j]) - names.begin());
            aligned[pos] = maxes[j];
        }
        per_experiment.push_back(std::move(aligned));
    }
    std::vector<double> overall(names.size(), 0.0);
    for (const auto& row : per_experiment) {
        for (std::size_t j = 0; j < names.size(); ++j) overall[j] = std::max(overall[j], row[j]);
    }
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return overall[a] > overall[b]; });

    TruncationResult result;
    std::vector<double> sums(tables.size(), 0.0);
    auto covered = [&](std::size_t d) { return clamp ? std::min(1.0, sums[d]) : sums[d]; };
    auto reached = [&] {
        if (theta >= 1.0) return false;
        for (std::size_t d = 0; d < tables.size(); ++d) {
            if (covered(d) < theta) return false;
        }
        return true;
    };

    std::size_t taken = 0;
    while (taken < order.size() && !reached()) {
        const auto j = order[taken++];
        for (std::size_t d = 0; d < tables.size(); ++d) sums[d] += per_experiment[d][j];
    }
    result.threshold_unreachable = !reached();
    if (result.threshold_unreachable) {
        for (; taken < order.size(); ++taken) {
            for (std::size_t d = 0; d < tables.size(); ++d) sums[d] += per_experiment[d][order[taken]];
        }
    }
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto j = order[r];
        result.ranking.push_back({names[j], overall[j], r < taken});
        if (r < taken) result.retained.push_back(names[j]);
    }
    for (std::size_t d = 0; d < tables.size(); ++d) result.coverage.push_back(covered(d));
    return result;
}

std::vector<double> mc_sobol_total(const std::function<double(std::span<const double>)>& model, std::size_t dimension,
                                   std::size_t samples, std::uint64_t seed)
{
    if (dimension < 1) throw ValidationError("mc_sobol_total: dimension must be >= 1");
    if (samples < 1000) throw ValidationError("mc_sobol_total: need at least 1000 samples");
    const auto n = static_cast<Eigen::Index>(samples);
    const auto s = static_cast<Eigen::Index>(dimension);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Matrix a(n, s);
    Matrix b(n, s);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = uniform(rng);

    const auto fa = kernels::evaluate_rows(model, a);
    const auto fb = kernels::evaluate_rows(model, b);
    std::vector<std::vector<double>> fab;
    fab.reserve(dimension);
    for (Eigen::Index j = 0; j < s; ++j) {
        Matrix ab = a;
        ab.col(j) = b.col(j);
        fab.push_back(kernels::evaluate_rows(model, ab));
    }

    std::vector<bool> valid(samples, true);
    std::size_t invalid = 0;
    for (std::size_t l = 0; l < samples; ++l) {
        bool ok = std::isfinite(fa[l]) && std::isfinite(fb[l]);
        for (const auto& f : fab) ok = ok && std::isfinite(f[l]);
        if (!ok) {
            valid[l] = false;
            ++invalid;
        }
    }
    if (static_cast<double>(invalid) > 0.01 * static_cast<double>(samples)) {
        throw NumericalError("mc_sobol_total: " + std::to_string(invalid) + " of " + std::to_string(samples) +
                             " sample rows produced non-finite model output (limit 1%)");
    }
    const auto used = static_cast<double>(samples - invalid);

    double mean = 0.0;
    for (std::size_t l = 0; l < samples; ++l) {
        if (valid[l]) mean += fa[l] + fb[l];
    }
    mean /= 2.0 * used;
    double variance = 0.0;
    for (std::size_t l = 0; l < samples; ++l) {
        if (!valid[l]) continue;
        variance += (fa[l] - mean) * (fa[l] - mean) + (fb[l] - mean) * (fb[l] - mean);
    }
    variance /= 2.0 * used - 1.0;
    if (!(variance > 0.0)) throw NumericalError("mc_sobol_total: model output has zero variance");

    std::vector<double> total(dimension, 0.0);
    for (std::size_t j = 0; j < dimension; ++j) {
        double sum = 0.0;
        for (std::size_t l = 0; l < samples; ++l) {
            if (!valid[l]) continue;
            const double d = fa[l] - fab[j][l];
            sum += d * d;
        }
        total[j] = sum / (2.0 * used) / variance;
    }
    return total;
}

std::string format_sensitivity_csv(const std::vector<SensitivityTable>& tables)
{
    std::string out = "experiment,station,parameter,total_index\n";
    for (const auto& t : tables) {
        for (std::size_t i = 0; i < t.indices.size(); ++i) {
            for (std::size_t j = 0; j < t.parameters.size(); ++j) {
                out += std::to_string(t.experiment_id) + ',' + std::to_string(i + 1) + ',' + t.parameters[j] + ',' +
                       io::format_double(t.indices[i][j]) + '\n';
            }
        }
    }
    return out;
}

std::string format_ranking_csv(const TruncationResult& result)
{
    std::string out = "rank,parameter,max_index,retained\n";
    for (std::size_t r = 0; r < result.ranking.size(); ++r) {
        const auto& p = result.ranking[r];
        out += std::to_string(r + 1) + ',' + p.name + ',' + io::format_double(p.max_index) + ',' +
               (p.retained ? "1" : "0") + '\n';
    }
    return out;
}

} // namespace dfi
