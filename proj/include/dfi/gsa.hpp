#pragma once

#include "dfi/archive.hpp"
#include "dfi/pce.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfi {

struct SobolResult {
    std::vector<double> total;
    /// Constant surrogate: all indices are reported as 0 instead of 0/0.
    bool zero_variance = false;
};

/// S_j = sum_{u: u_j > 0} c_u^2 / sum_{u != 0} c_u^2.
SobolResult total_sobol(const PceSurrogate& surrogate);

/// Total indices of one experiment at every station. Parameters outside `active`
/// (when given) are forced to 0, e.g. kinetic parameters for a thermodynamic observable.
struct SensitivityTable {
    int experiment_id = 0;
    std::vector<std::string> parameters;
    std::vector<std::vector<double>> station_coords;
    std::vector<std::vector<double>> indices; ///< [station][parameter]
    std::vector<bool> zero_variance;          ///< per station

    [[nodiscard]] std::vector<double> max_over_stations() const;
};

SensitivityTable sensitivity_table(const SurrogateArchive& archive,
                                   const std::optional<std::vector<std::string>>& active = std::nullopt);

struct RankedParameter {
    std::string name;
    double max_index = 0.0;
    bool retained = false;
};

struct TruncationResult {
    std::vector<RankedParameter> ranking;   ///< sorted by max index, ties by first appearance
    std::vector<std::string> retained;      ///< in rank order
    std::vector<double> coverage;           ///< explained fraction per experiment (clamped if requested)
    bool threshold_unreachable = false;     ///< everything retained because theta was not attainable
};

/// Greedy prefix of the ranking until every experiment's summed max-indices reach theta.
/// theta >= 1 is treated as unreachable. Throws ValidationError unless 0 < theta <= 1.
TruncationResult rank_and_truncate(const std::vector<SensitivityTable>& tables, double theta, bool clamp = true);

/// Jansen total-effect estimator with inputs uniform on [-1, 1]^s. Uses N(s+2) model
/// evaluations; rows with non-finite output are dropped unless they exceed 1% of N.
std::vector<double> mc_sobol_total(const std::function<double(std::span<const double>)>& model, std::size_t dimension,
                                   std::size_t samples, std::uint64_t seed);

std::string format_sensitivity_csv(const std::vector<SensitivityTable>& tables);
std::string format_ranking_csv(const TruncationResult& result);

} // namespace dfi
