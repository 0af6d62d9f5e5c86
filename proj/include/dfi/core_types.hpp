#pragma once

#include "dfi/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfi {

struct Parameter {
    std::string name;
    double nominal = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::string unit;
};

/// Ordered, named parameters with bounds. The order defines the coordinate index used by
/// every sample matrix in the toolkit. Immutable after construction.
class ParameterSpace {
public:
    ParameterSpace() = default;
    /// Throws ValidationError on duplicate names, degenerate bounds or an out-of-bounds nominal.
    explicit ParameterSpace(std::vector<Parameter> entries);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const Parameter& operator[](std::size_t j) const { return entries_.at(j); }
    [[nodiscard]] const std::vector<Parameter>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& name) const;
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::vector<double> nominal() const;
    [[nodiscard]] std::vector<double> midpoint() const;
    /// Bound width (b_j - a_j) / 6, the per-coordinate proposal and warm-start scale.
    [[nodiscard]] std::vector<double> sixth_widths() const;

    [[nodiscard]] std::vector<double> to_reference(std::span<const double> nu) const;
    [[nodiscard]] std::vector<double> from_reference(std::span<const double> xi) const;

    /// Hash of names and bounds; used to tie surrogate archives to the space they were fitted on.
    [[nodiscard]] std::string checksum() const;

    friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;

private:
    std::vector<Parameter> entries_;
};

bool operator==(const Parameter& a, const Parameter& b);

ParameterSpace load_parameter_space(const std::filesystem::path& path);
ParameterSpace parse_parameter_space(std::string_view text, std::string_view source_name);
std::string format_parameter_space(const ParameterSpace& space);
void write_parameter_space(const std::filesystem::path& path, const ParameterSpace& space);

/// One experiment's reported summaries: stations x, means y and uncertainties s.
struct DataSummarySet {
    int id = 0;
    std::string label;
    std::size_t coord_dim = 1;
    std::vector<double> coords; ///< row-major, size() * coord_dim
    std::vector<double> y;
    std::vector<double> s;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    [[nodiscard]] std::span<const double> coord(std::size_t n) const
    {
        return {coords.data() + n * coord_dim, coord_dim};
    }
    /// Throws ValidationError when lengths disagree, s <= 0, or the dimension is not 1 or 2.
    void validate() const;
};

/// Reads `station,coord1[,coord2],y,s`.
DataSummarySet load_data_summary(const std::filesystem::path& path, int id, std::string label,
                                 std::size_t coord_dim);
std::string format_data_summary(const DataSummarySet& set);

struct ExperimentEntry {
    int id = 0;
    std::string label;
    std::filesystem::path path;
    std::size_t coord_dim = 1;
};

/// Manifest CSV `id,label,path,dim`; relative paths resolve against the manifest directory.
std::vector<ExperimentEntry> load_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ExperimentEntry>& entries);
std::vector<DataSummarySet> load_experiments(const std::filesystem::path& manifest_path);

/// Delta-method transform to log10 space: y' = log10 y, s' = s / (y ln 10). Requires y > 0.
DataSummarySet to_log10(const DataSummarySet& set);

/// K replicate synthetic data sets for one experiment: draws(k, n) ~ N(y_n, beta s_n^2).
struct SyntheticDataCollection {
    int experiment_id = 0;
    int k = 0;
    double beta = 1.0;
    std::uint64_t seed = 0;
    Matrix draws;          ///< k x N
    std::vector<double> s; ///< reported uncertainties of the source set

    [[nodiscard]] std::size_t stations() const noexcept { return s.size(); }
    /// Throws ValidationError on beta <= 0 or a shape mismatch.
    void validate() const;
};

struct GaussianPrior {
    std::vector<double> mean;
    std::vector<double> sd;

    [[nodiscard]] std::size_t size() const noexcept { return mean.size(); }
};

/// mean = (a+b)/2, sd = (b-a)/6 per parameter.
GaussianPrior default_prior(const ParameterSpace& space);

enum class WeightMode { none, uniform, inverse_count };
enum class DataSpace { linear, log10 };

struct CalibrationConfig {
    int pce_order = 2;
    double prune_tau = 1e-4;
    int prune_passes = 5;

    int synthetic_k = 100;
    std::map<int, int> synthetic_k_override; ///< per experiment id

    long long mcmc_steps = 1'000'000;
    double jump = 0.5;
    long long burn_in = 100'000;
    long long subsample = 5;
    bool adapt = true;
    long long adapt_start = 0; ///< 0 selects max(1000, 2s)
    int warm_start_iterations = 50;

    std::vector<double> beta_grid;
    std::string statistic = "3sigma";
    std::string metric = "rel_l2";
    double epsilon = 0.2;
    WeightMode weights = WeightMode::uniform;
    std::uint64_t master_seed = 1;
    DataSpace data_space = DataSpace::linear;

    double truncation_threshold = 0.75;
    bool truncation_clamp = true;
    int workers = 0; ///< 0 leaves the OpenMP default

    CalibrationConfig();

    [[nodiscard]] int k_for(int experiment_id) const;
    /// Throws ValidationError naming the offending key.
    void validate() const;
    /// Applies one `key = value` assignment.
    void set(const std::string& key, const std::string& value);
    /// Canonical key/value dump; parse_config(format()) reproduces the config.
    [[nodiscard]] std::string format() const;
};

/// `n` log-spaced values from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

CalibrationConfig parse_config(std::string_view text, std::string_view source_name);
CalibrationConfig load_config(const std::filesystem::path& path);

std::string to_string(WeightMode mode);
std::string to_string(DataSpace space);

} // namespace dfi
