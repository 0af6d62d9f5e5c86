#pragma once

#include "dfi/core_types.hpp"
#include "dfi/pce.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dfi {

/// Fitted surrogates for one observable (one experiment), one per station.
///
/// Text layout, byte-stable for identical inputs:
///
///     dfi-pce-archive 1
///     experiment <id>
///     label <text>
///     data_space linear|log10
///     dimension <s>
///     order <p>
///     coord_dim 1|2
///     checksum <hex of names and bounds>
///     param <name> <nominal> <lower> <upper> <unit|->      (s lines)
///     station <coord1> [<coord2>]
///     terms <count>
///     <u_1> ... <u_s> <coefficient>                        (count lines)
///     ...                                                  (next station)
struct SurrogateArchive {
    int experiment_id = 0;
    std::string label;
    DataSpace data_space = DataSpace::linear;
    int order = 0;
    std::size_t coord_dim = 1;
    ParameterSpace parameters;
    std::vector<double> station_coords; ///< row-major, stations() * coord_dim
    std::vector<PceSurrogate> surrogates;

    [[nodiscard]] std::size_t stations() const noexcept { return surrogates.size(); }
    [[nodiscard]] std::span<const double> coord(std::size_t i) const
    {
        return {station_coords.data() + i * coord_dim, coord_dim};
    }

    /// Requires coord_dim == 1.
    [[nodiscard]] SurrogateFamily family() const;

    /// Surrogate for an arbitrary station: coefficient interpolation for scalar coordinates,
    /// exact lookup (1e-9 relative) for two-dimensional ones.
    [[nodiscard]] PceSurrogate at(std::span<const double> coordinate) const;
};

std::string format_archive(const SurrogateArchive& archive);
SurrogateArchive parse_archive(std::string_view text, std::string_view source_name);
SurrogateArchive load_archive(const std::filesystem::path& path);
void write_archive(const std::filesystem::path& path, const SurrogateArchive& archive);

} // namespace dfi
