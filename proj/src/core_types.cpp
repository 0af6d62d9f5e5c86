#include "dfi/core_types.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace dfi {

bool operator==(const Parameter& a, const Parameter& b)
{
    return a.name == b.name && a.nominal == b.nominal && a.lower == b.lower && a.upper == b.upper &&
           a.unit == b.unit;
}

ParameterSpace::ParameterSpace(std::vector<Parameter> entries)
    : entries_(std::move(entries))
{
    std::set<std::string> seen;
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        const auto& p = entries_[j];
        const std::string where = "parameter " + std::to_string(j + 1) + " '" + p.name + "'";
        if (p.name.empty()) throw ValidationError(where + ": empty name");
        if (!seen.insert(p.name).second) throw ValidationError(where + ": duplicate name");
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !std::isfinite(p.nominal)) {
            throw ValidationError(where + ": non-finite value");
        }
        if (!(p.lower < p.upper)) throw ValidationError(where + ": degenerate bounds (lower >= upper)");
        if (p.nominal < p.lower || p.nominal > p.upper) {
            throw ValidationError(where + ": nominal outside [lower, upper]");
        }
    }
}

std::optional<std::size_t> ParameterSpace::index_of(const std::string& name) const
{
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        if (entries_[j].name == name) return j;
    }
    return std::nullopt;
}

std::vector<std::string> ParameterSpace::names() const
{
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& p : entries_) out.push_back(p.name);
    return out;
}

std::vector<double> ParameterSpace::nominal() const
{
    std::vector<double> out;
    for (const auto& p : entries_) out.push_back(p.nominal);
    return out;
}

std::vector<double> ParameterSpace::midpoint() const
{
    std::vector<double> out;
    for (const auto& p : entries_) out.push_back(0.5 * (p.lower + p.upper));
    return out;
}

std::vector<double> ParameterSpace::sixth_widths() const
{
    std::vector<double> out;
    for (const auto& p : entries_) out.push_back((p.upper - p.lower) / 6.0);
    return out;
}

std::vector<double> ParameterSpace::to_reference(std::span<const double> nu) const
{
    if (nu.size() != entries_.size()) throw ValidationError("to_reference: dimension mismatch");
    std::vector<double> xi(nu.size());
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const auto& p = entries_[j];
        xi[j] = 2.0 * (nu[j] - p.lower) / (p.upper - p.lower) - 1.0;
    }
    return xi;
}

std::vector<double> ParameterSpace::from_reference(std::span<const double> xi) const
{
    if (xi.size() != entries_.size()) throw ValidationError("from_reference: dimension mismatch");
    std::vector<double> nu(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        const auto& p = entries_[j];
        nu[j] = p.lower + 0.5 * (xi[j] + 1.0) * (p.upper - p.lower);
    }
    return nu;
}

std::string ParameterSpace::checksum() const
{
    std::string canonical;
    for (const auto& p : entries_) {
        canonical += p.name + ';' + io::format_double(p.lower) + ';' + io::format_double(p.upper) + '\n';
    }
    return io::hex64(io::fnv1a(canonical));
}

ParameterSpace parse_parameter_space(std::string_view text, std::string_view source_name)
{
    const auto table = io::parse_csv(text, source_name);
    const std::vector<std::string> expected{"name", "nominal", "lower", "upper", "unit"};
    if (table.header != expected) {
        throw ValidationError(std::string(source_name) + ": header must be 'name,nominal,lower,upper,unit'");
    }
    std::vector<Parameter> entries;
    std::set<std::string> seen;
    for (const auto& row : table.rows) {
        const std::string where = std::string(source_name) + " row " + std::to_string(row.line);
        if (row.fields.size() != 5) throw ValidationError(where + ": malformed row (expected 5 fields)");
        Parameter p;
        p.name = row.fields[0];
        p.nominal = io::parse_double(row.fields[1], where);
        p.lower = io::parse_double(row.fields[2], where);
        p.upper = io::parse_double(row.fields[3], where);
        p.unit = row.fields[4];
        if (p.name.empty()) throw ValidationError(where + ": malformed row (empty name)");
        if (!seen.insert(p.name).second) throw ValidationError(where + ": duplicate name '" + p.name + "'");
        if (!(p.lower < p.upper)) throw ValidationError(where + ": degenerate bounds (lower >= upper)");
        if (p.nominal < p.lower || p.nominal > p.upper) {
            throw ValidationError(where + ": nominal outside [lower, upper]");
        }
        entries.push_back(std::move(p));
    }
    return ParameterSpace(std::move(entries));
}

ParameterSpace load_parameter_space(const std::filesystem::path& path)
{
    return parse_parameter_space(io::read_text(path), path.string());
}

std::string format_parameter_space(const ParameterSpace& space)
{
    std::string out = "name,nominal,lower,upper,unit\n";
    for (const auto& p : space.entries()) {
        out += p.name + ',' + io::format_double(p.nominal) + ',' + io::format_double(p.lower) + ',' +
               io::format_double(p.upper) + ',' + p.unit + '\n';
    }
    return out;
}

void write_parameter_space(const std::filesystem::path& path, const ParameterSpace& space)
{
    io::write_text(path, format_parameter_space(space));
}

void DataSummarySet::validate() const
{
    const std::string where = "experiment " + std::to_string(id);
    if (coord_dim != 1 && coord_dim != 2) throw ValidationError(where + ": coordinate dimension must be 1 or 2");
    if (y.empty()) throw ValidationError(where + ": no stations");
    if (s.size() != y.size() || coords.size() != y.size() * coord_dim) {
        throw ValidationError(where + ": station lists have different lengths");
    }
    for (std::size_t n = 0; n < y.size(); ++n) {
        if (!std::isfinite(y[n])) throw ValidationError(where + ": non-finite y at station " + std::to_string(n + 1));
        if (!(s[n] > 0.0) || !std::isfinite(s[n])) {
            throw ValidationError(where + ": uncertainty must be positive at station " + std::to_string(n + 1));
        }
    }
}

DataSummarySet load_data_summary(const std::filesystem::path& path, int id, std::string label,
                                 std::size_t coord_dim)
{
    const auto table = io::read_csv(path);
    std::vector<std::string> expected{"station", "coord1"};
    if (coord_dim == 2) expected.emplace_back("coord2");
    expected.emplace_back("y");
    expected.emplace_back("s");
    if (table.header != expected) {
        throw ValidationError(path.string() + ": header must be 'station,coord1" +
                              std::string(coord_dim == 2 ? ",coord2" : "") + ",y,s'");
    }
    DataSummarySet set;
    set.id = id;
    set.label = std::move(label);
    set.coord_dim = coord_dim;
    for (const auto& row : table.rows) {
        const std::string where = path.string() + " row " + std::to_string(row.line);
        if (row.fields.size() != expected.size()) throw ValidationError(where + ": malformed row");
        for (std::size_t c = 0; c < coord_dim; ++c) set.coords.push_back(io::parse_double(row.fields[1 + c], where));
        set.y.push_back(io::parse_double(row.fields[1 + coord_dim], where));
        const double s = io::parse_double(row.fields[2 + coord_dim], where);
        if (!(s > 0.0)) throw ValidationError(where + ": uncertainty must be positive");
        set.s.push_back(s);
    }
    set.validate();
    return set;
}

std::string format_data_summary(const DataSummarySet& set)
{
    std::string out = set.coord_dim == 2 ? "station,coord1,coord2,y,s\n" : "station,coord1,y,s\n";
    for (std::size_t n = 0; n < set.size(); ++n) {
        out += std::to_string(n + 1);
        for (double c : set.coord(n)) out += ',' + io::format_double(c);
        out += ',' + io::format_double(set.y[n]) + ',' + io::format_double(set.s[n]) + '\n';
    }
    return out;
}

std::vector<ExperimentEntry> load_manifest(const std::filesystem::path& path)
{
    const auto table = io::read_csv(path);
    const std::vector<std::string> expected{"id", "label", "path", "dim"};
    if (table.header != expected) throw ValidationError(path.string() + ": header must be 'id,label,path,dim'");
    std::vector<ExperimentEntry> entries;
    std::set<int> ids;
    for (const auto& row : table.rows) {
        const std::string where = path.string() + " row " + std::to_string(row.line);
        if (row.fields.size() != 4) throw ValidationError(where + ": malformed row");
        ExperimentEntry e;
        e.id = static_cast<int>(io::parse_integer(row.fields[0], where));
        e.label = row.fields[1];
        e.path = row.fields[2];
        if (e.path.is_relative()) e.path = path.parent_path() / e.path;
        const auto dim = io::parse_integer(row.fields[3], where);
        if (dim != 1 && dim != 2) throw ValidationError(where + ": dim must be 1 or 2");
        e.coord_dim = static_cast<std::size_t>(dim);
        if (!ids.insert(e.id).second) throw ValidationError(where + ": duplicate experiment id");
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw ValidationError(path.string() + ": no experiments listed");
    return entries;
}

std::string format_manifest(const std::vector<ExperimentEntry>& entries)
{
    std::string out = "id,label,path,dim\n";
    for (const auto& e : entries) {
        out += std::to_string(e.id) + ',' + e.label + ',' + e.path.generic_string() + ',' +
               std::to_string(e.coord_dim) + '\n';
    }
    return out;
}

std::vector<DataSummarySet> load_experiments(const std::filesystem::path& manifest_path)
{
    std::vector<DataSummarySet> sets;
    for (const auto& e : load_manifest(manifest_path)) {
        sets.push_back(load_data_summary(e.path, e.id, e.label, e.coord_dim));
    }
    return sets;
}

DataSummarySet to_log10(const DataSummarySet& set)
{
    DataSummarySet out = set;
    for (std::size_t n = 0; n < set.size(); ++n) {
        if (!(set.y[n] > 0.0)) {
            throw ValidationError("experiment " + std::to_string(set.id) +
                                  ": log10 data space requires positive y (station " + std::to_string(n + 1) + ")");
        }
        out.y[n] = std::log10(set.y[n]);
        out.s[n] = set.s[n] / (set.y[n] * std::log(10.0));
    }
    return out;
}

void SyntheticDataCollection::validate() const
{
    if (!(beta > 0.0)) throw ValidationError("synthetic data: beta must be positive");
    if (k < 1 || draws.rows() != k || static_cast<std::size_t>(draws.cols()) != s.size()) {
        throw ValidationError("synthetic data: draws must be K x N");
    }
}

GaussianPrior default_prior(const ParameterSpace& space)
{
    GaussianPrior prior;
    for (const auto& p : space.entries()) {
        prior.mean.push_back(0.5 * (p.lower + p.upper));
        prior.sd.push_back((p.upper - p.lower) / 6.0);
    }
    return prior;
}

// ---------------------------------------------------------------------------------------------
// configuration

std::vector<double> logspace(double lo, double hi, int n)
{
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ValidationError("logspace: need n >= 1 and 0 < lo <= hi");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

CalibrationConfig::CalibrationConfig()
    : beta_grid(logspace(1e-2, 1e2, 20))
{
}

int CalibrationConfig::k_for(int experiment_id) const
{
    const auto it = synthetic_k_override.find(experiment_id);
    return it == synthetic_k_override.end() ? synthetic_k : it->second;
}

void CalibrationConfig::validate() const
{
    auto fail = [](const std::string& key, const std::string& why) {
        throw ValidationError("config '" + key + "': " + why);
    };
    if (pce_order < 0) fail("pce.order", "must be >= 0");
    if (!(prune_tau >= 0.0) || prune_tau >= 1.0) fail("pce.prune_tau", "must be in [0, 1)");
    if (prune_passes < 0) fail("pce.prune_passes", "must be >= 0");
    if (synthetic_k < 1) fail("synthetic.K", "must be >= 1");
    for (const auto& [id, k] : synthetic_k_override) {
        if (k < 1) fail("synthetic.K." + std::to_string(id), "must be >= 1");
    }
    if (mcmc_steps < 1) fail("mcmc.steps", "must be >= 1");
    if (!(jump > 0.0)) fail("mcmc.jump", "must be > 0");
    if (burn_in < 0) fail("mcmc.burn_in", "must be >= 0");
    if (burn_in >= mcmc_steps) fail("mcmc.burn_in", "must be < mcmc.steps");
    if (subsample < 1) fail("mcmc.subsample", "must be >= 1");
    if (adapt_start < 0) fail("mcmc.adapt_start", "must be >= 0");
    if (warm_start_iterations < 0) fail("mcmc.warm_start_iterations", "must be >= 0");
    if (beta_grid.empty()) fail("beta.grid", "must be nonempty");
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        if (!(beta_grid[i] > 0.0) || !std::isfinite(beta_grid[i])) fail("beta.grid", "values must be positive");
        if (i > 0 && !(beta_grid[i] > beta_grid[i - 1])) fail("beta.grid", "values must be strictly increasing");
    }
    if (statistic != "3sigma") fail("consistency.statistic", "only '3sigma' is supported");
    if (metric != "rel_l2") fail("consistency.metric", "only 'rel_l2' is supported");
    if (!(epsilon > 0.0)) fail("consistency.epsilon", "must be > 0");
    if (!(truncation_threshold > 0.0) || truncation_threshold > 1.0) fail("truncation.threshold", "must be in (0, 1]");
    if (workers < 0) fail("run.workers", "must be >= 0");
}

namespace {

bool parse_bool(const std::string& value, const std::string& key)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ValidationError("config '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> parse_grid(const std::string& value, const std::string& key)
{
    const std::string v = io::trim(value);
    if (v.rfind("logspace(", 0) == 0 && v.back() == ')') {
        const auto args = io::split(std::string_view(v).substr(9, v.size() - 10), ',');
        if (args.size() != 3) throw ValidationError("config '" + key + "': logspace(lo, hi, n) takes 3 arguments");
        return logspace(io::parse_double(args[0], key), io::parse_double(args[1], key),
                        static_cast<int>(io::parse_integer(args[2], key)));
    }
    std::vector<double> grid;
    for (const auto& part : io::split(v, ',')) grid.push_back(io::parse_double(part, "config '" + key + "'"));
    return grid;
}

} // namespace

void CalibrationConfig::set(const std::string& raw_key, const std::string& raw_value)
{
    const std::string key = io::trim(raw_key);
    const std::string value = io::trim(raw_value);
    const std::string ctx = "config '" + key + "'";
    auto as_int = [&] { return io::parse_integer(value, ctx); };
    auto as_real = [&] { return io::parse_double(value, ctx); };

    if (key == "pce.order") pce_order = static_cast<int>(as_int());
    else if (key == "pce.prune_tau") prune_tau = as_real();
    else if (key == "pce.prune_passes") prune_passes = static_cast<int>(as_int());
    else if (key == "synthetic.K") synthetic_k = static_cast<int>(as_int());
    else if (key.rfind("synthetic.K.", 0) == 0) {
        const int id = static_cast<int>(io::parse_integer(key.substr(12), ctx));
        synthetic_k_override[id] = static_cast<int>(as_int());
    }
    else if (key == "mcmc.steps") mcmc_steps = as_int();
    else if (key == "mcmc.jump") jump = as_real();
    else if (key == "mcmc.burn_in") burn_in = as_int();
    else if (key == "mcmc.subsample") subsample = as_int();
    else if (key == "mcmc.adapt") adapt = parse_bool(value, key);
    else if (key == "mcmc.adapt_start") adapt_start = as_int();
    else if (key == "mcmc.warm_start_iterations") warm_start_iterations = static_cast<int>(as_int());
    else if (key == "beta.grid") beta_grid = parse_grid(value, key);
    else if (key == "consistency.statistic") statistic = value;
    else if (key == "consistency.metric") metric = value;
    else if (key == "consistency.epsilon") epsilon = as_real();
    else if (key == "likelihood.weights") {
        if (value == "none") weights = WeightMode::none;
        else if (value == "uniform") weights = WeightMode::uniform;
        else if (value == "inverse-count") weights = WeightMode::inverse_count;
        else throw ValidationError(ctx + ": expected none | uniform | inverse-count");
    }
    else if (key == "seed.master") {
        const auto v = io::trim(value);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ValidationError(ctx + ": expected an unsigned integer");
        }
        master_seed = seed;
    }
    else if (key == "data.space") {
        if (value == "linear") data_space = DataSpace::linear;
        else if (value == "log10") data_space = DataSpace::log10;
        else throw ValidationError(ctx + ": expected linear | log10");
    }
    else if (key == "truncation.threshold") truncation_threshold = as_real();
    else if (key == "truncation.clamp") truncation_clamp = parse_bool(value, key);
    else if (key == "run.workers") workers = static_cast<int>(as_int());
    else if (key.rfind("input.", 0) == 0 || key.rfind("info.", 0) == 0) {
        // provenance entries written into run manifests
    }
    else throw ValidationError("unknown config key '" + key + "'");
}

std::string CalibrationConfig::format() const
{
    std::ostringstream out;
    out << "pce.order = " << pce_order << '\n'
        << "pce.prune_tau = " << io::format_double(prune_tau) << '\n'
        << "pce.prune_passes = " << prune_passes << '\n'
        << "synthetic.K = " << synthetic_k << '\n';
    for (const auto& [id, k] : synthetic_k_override) out << "synthetic.K." << id << " = " << k << '\n';
    out << "mcmc.steps = " << mcmc_steps << '\n'
        << "mcmc.jump = " << io::format_double(jump) << '\n'
        << "mcmc.burn_in = " << burn_in << '\n'
        << "mcmc.subsample = " << subsample << '\n'
        << "mcmc.adapt = " << (adapt ? "true" : "false") << '\n'
        << "mcmc.adapt_start = " << adapt_start << '\n'
        << "mcmc.warm_start_iterations = " << warm_start_iterations << '\n'
        << "beta.grid = ";
    for (std::size_t i = 0; i < beta_grid.size(); ++i) out << (i ? ", " : "") << io::format_double(beta_grid[i]);
    out << '\n'
        << "consistency.statistic = " << statistic << '\n'
        << "consistency.metric = " << metric << '\n'
        << "consistency.epsilon = " << io::format_double(epsilon) << '\n'
        << "likelihood.weights = " << to_string(weights) << '\n'
        << "seed.master = " << master_seed << '\n'
        << "data.space = " << to_string(data_space) << '\n'
        << "truncation.threshold = " << io::format_double(truncation_threshold) << '\n'
        << "truncation.clamp = " << (truncation_clamp ? "true" : "false") << '\n'
        << "run.workers = " << workers << '\n';
    return out.str();
}

CalibrationConfig parse_config(std::string_view text, std::string_view source_name)
{
    CalibrationConfig config;
    std::size_t line_number = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = io::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(std::string(source_name) + " line " + std::to_string(line_number) +
                                  ": expected 'key = value'");
        }
        try {
            config.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(source_name) + " line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    try {
        config.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source_name) + ": " + e.what());
    }
    return config;
}

CalibrationConfig load_config(const std::filesystem::path& path)
{
    return parse_config(io::read_text(path), path.string());
}

std::string to_string(WeightMode mode)
{
    switch (mode) {
    case WeightMode::none: return "none";
    case WeightMode::uniform: return "uniform";
    case WeightMode::inverse_count: return "inverse-count";
    }
    return "?";
}

std::string to_string(DataSpace space)
{
    return space == DataSpace::linear ? "linear" : "log10";
}

} // namespace dfi
