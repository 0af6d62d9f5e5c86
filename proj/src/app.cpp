#include "dfi/app.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"
#include "dfi/kernels.hpp"
#include "dfi/mcmc.hpp"
#include "dfi/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace dfi::app {

namespace {

std::string file_digest(const fs::path& path)
{
    return io::hex64(io::fnv1a(io::read_text(path)));
}

std::string id_suffix(int id)
{
    return "_" + std::to_string(id);
}

InferenceSetup setup_for(const Problem& problem, const CalibrationConfig& config, int experiment_id)
{
    InferenceSetup setup;
    setup.prior = problem.prior;
    setup.start = problem.space.nominal();
    setup.scales = problem.space.sixth_widths();
    setup.sampler = sampler_settings(config);
    setup.k = config.k_for(experiment_id);
    setup.epsilon = config.epsilon;
    setup.master_seed = config.master_seed;
    return setup;
}

} // namespace

CalibrationConfig resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides)
{
    CalibrationConfig config = file ? load_config(*file) : CalibrationConfig{};
    for (const auto& assignment : overrides) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' must be key=value");
        config.set(io::trim(assignment.substr(0, eq)), io::trim(assignment.substr(eq + 1)));
    }
    config.validate();
    return config;
}

FitSurrogateOutcome fit_surrogate_command(const FitSurrogateOptions& options)
{
    const auto entries = load_manifest(options.manifest);
    if (entries.empty()) throw ValidationError(options.manifest.string() + ": manifest lists no experiments");
    auto entry = entries.front();
    if (options.experiment) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.id == *options.experiment; });
        if (it == entries.end()) throw ValidationError("experiment " + std::to_string(*options.experiment) + " not in manifest");
        entry = *it;
    }
    const auto set = load_data_summary(entry.path, entry.id, entry.label, entry.coord_dim);
    const auto space = load_parameter_space(options.bounds);
    if (!(options.test_fraction >= 0.0 && options.test_fraction < 1.0)) {
        throw ValidationError("test fraction must be in [0, 1)");
    }

    const auto table = io::read_csv(options.samples);
    const std::string source = options.samples.string();
    const std::size_t s = space.size();
    const std::size_t n_stations = set.size();
    if (table.header.size() != s + n_stations) {
        throw ValidationError(source + ": expected " + std::to_string(s) + " parameter columns and " +
                              std::to_string(n_stations) + " output columns, found " +
                              std::to_string(table.header.size()) + " columns");
    }
    for (std::size_t j = 0; j < s; ++j) {
        if (io::trim(table.header[j]) != space[j].name) {
            throw ValidationError(source + ": column " + std::to_string(j + 1) + " is '" + table.header[j] +
                                  "', expected parameter '" + space[j].name + "'");
        }
    }
    const auto rows = static_cast<Eigen::Index>(table.rows.size());
    Matrix inputs(rows, static_cast<Eigen::Index>(s));
    Matrix outputs(rows, static_cast<Eigen::Index>(n_stations));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = table.rows[static_cast<std::size_t>(r)];
        const std::string where = source + " row " + std::to_string(row.line);
        if (row.fields.size() != table.header.size()) throw ValidationError(where + ": wrong number of fields");
        for (std::size_t j = 0; j < s; ++j) inputs(r, static_cast<Eigen::Index>(j)) = io::parse_double(row.fields[j], where);
        for (std::size_t n = 0; n < n_stations; ++n) {
            double v = io::parse_double(row.fields[s + n], where);
            if (options.data_space == DataSpace::log10) v = v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
            outputs(r, static_cast<Eigen::Index>(n)) = v;
        }
    }
    const auto n_test = static_cast<Eigen::Index>(std::floor(static_cast<double>(rows) * options.test_fraction));
    const Eigen::Index n_train = rows - n_test;
    const Matrix train_in = inputs.topRows(n_train);
    const Matrix test_in = inputs.bottomRows(n_test);

    FitOptions fit;
    fit.order = options.order;
    fit.prune_tau = options.prune_tau;
    fit.prune_passes = options.prune_passes;

    FitSurrogateOutcome outcome;
    outcome.stations.resize(n_stations);
    std::vector<PceSurrogate> surrogates(n_stations);
    std::vector<std::exception_ptr> errors(n_stations);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < static_cast<long long>(n_stations); ++i) {
        const auto n = static_cast<std::size_t>(i);
        const auto col = static_cast<Eigen::Index>(n);
        try {
            std::vector<double> y(static_cast<std::size_t>(n_train));
            for (Eigen::Index r = 0; r < n_train; ++r) y[static_cast<std::size_t>(r)] = outputs(r, col);
            auto result = fit_surrogate(space, train_in, y, fit);
            auto& report = outcome.stations[n];
            const auto c = set.coord(n);
            report.coord.assign(c.begin(), c.end());
            report.train_error = result.train_error;
            report.terms = result.surrogate.indices().size();
            report.failures = result.failures;
            report.test_error = std::numeric_limits<double>::quiet_NaN();
            std::vector<double> ref;
            std::vector<double> approx;
            for (Eigen::Index r = 0; r < n_test; ++r) {
                const double truth = outputs(n_train + r, col);
                if (!std::isfinite(truth)) continue;
                ref.push_back(truth);
                approx.push_back(result.surrogate.evaluate(row_span(test_in, r)));
            }
            if (!ref.empty()) report.test_error = relative_l2_error(ref, approx);
            surrogates[n] = std::move(result.surrogate);
        } catch (...) {
            errors[n] = std::current_exception();
        }
    }
    for (std::size_t n = 0; n < n_stations; ++n) {
        if (!errors[n]) continue;
        try {
            std::rethrow_exception(errors[n]);
        } catch (const NumericalError& e) {
            throw NumericalError("station " + std::to_string(n + 1) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("station " + std::to_string(n + 1) + ": " + e.what());
        }
    }

    auto& archive = outcome.archive;
    archive.experiment_id = set.id;
    archive.label = set.label;
    archive.data_space = options.data_space;
    archive.order = options.order;
    archive.coord_dim = set.coord_dim;
    archive.parameters = space;
    archive.station_coords = set.coords;
    archive.surrogates = std::move(surrogates);
    write_archive(options.out, archive);
    const fs::path report_path = options.report ? *options.report : fs::path(options.out).replace_extension(".errors.csv");
    io::write_text(report_path, format_fit_report_csv(outcome));
    return outcome;
}

std::string format_fit_report_csv(const FitSurrogateOutcome& outcome)
{
    std::string out = "station,";
    out += outcome.archive.coord_dim == 1 ? "coord1" : "coord1,coord2";
    out += ",train_error,test_error,terms,failures\n";
    for (std::size_t n = 0; n < outcome.stations.size(); ++n) {
        const auto& st = outcome.stations[n];
        out += std::to_string(n + 1);
        for (double c : st.coord) out += ',' + io::format_double(c);
        out += ',' + io::format_double(st.train_error) + ',' + io::format_double(st.test_error) + ',' +
               std::to_string(st.terms) + ',' + std::to_string(st.failures) + '\n';
    }
    return out;
}

TruncationResult sensitivity_command(const SensitivityOptions& options, std::ostream& log)
{
    if (options.archives.empty()) throw ValidationError("sensitivity: no archives given");
    std::vector<SensitivityTable> tables;
    for (const auto& path : options.archives) {
        const auto archive = load_archive(path);
        tables.push_back(sensitivity_table(archive));
        const auto& t = tables.back();
        for (std::size_t i = 0; i < t.zero_variance.size(); ++i) {
            if (t.zero_variance[i]) {
                log << "warning: experiment " << t.experiment_id << " station " << i + 1
                    << " has a constant surrogate; its indices are reported as 0\n";
            }
        }
    }
    const auto result = rank_and_truncate(tables, options.threshold, options.clamp);
    if (result.threshold_unreachable) {
        log << "warning: threshold " << io::format_double(options.threshold)
            << " cannot be reached by a strict subset; all parameters retained\n";
    }
    io::write_text(options.out_dir / "sensitivity.csv", format_sensitivity_csv(tables));
    io::write_text(options.out_dir / "ranking.csv", format_ranking_csv(result));
    std::string retained;
    for (const auto& name : result.retained) retained += name + '\n';
    io::write_text(options.out_dir / "retained.txt", retained);
    log << "retained " << result.retained.size() << " of " << result.ranking.size() << " parameters\n";
    return result;
}

ParameterSpace reduce_command(const ReduceOptions& options)
{
    auto space = load_parameter_space(options.bounds);
    if (options.retained) {
        std::set<std::string> keep;
        std::istringstream in(io::read_text(*options.retained));
        std::string line;
        while (std::getline(in, line)) {
            line = io::trim(line);
            if (line.empty() || line.front() == '#') continue;
            if (!space.index_of(line)) {
                throw ValidationError(options.retained->string() + ": unknown parameter '" + line + "'");
            }
            keep.insert(line);
        }
        std::vector<Parameter> entries;
        for (const auto& p : space.entries()) {
            if (keep.count(p.name)) entries.push_back(p);
        }
        space = ParameterSpace(std::move(entries));
    }
    if (!options.copies.empty()) space = experiment_specific_copies(space, options.copies, options.experiments).space;
    write_parameter_space(options.out, space);
    return space;
}

Problem load_problem(const CalibrationInputs& inputs)
{
    inputs.config.validate();
    Problem problem;
    problem.sets = load_experiments(inputs.manifest);
    if (problem.sets.empty()) throw ValidationError(inputs.manifest.string() + ": manifest lists no experiments");
    if (inputs.config.data_space == DataSpace::log10) {
        for (auto& set : problem.sets) set = to_log10(set);
    }
    problem.space = load_parameter_space(inputs.bounds);
    problem.prior = default_prior(problem.space);

    std::map<int, SurrogateArchive> by_id;
    for (const auto& path : inputs.archives) {
        auto archive = load_archive(path);
        const int id = archive.experiment_id;
        if (archive.data_space != inputs.config.data_space) {
            throw ValidationError(path.string() + ": archive data space '" + to_string(archive.data_space) +
                                  "' differs from configured '" + to_string(inputs.config.data_space) + "'");
        }
        if (!by_id.emplace(id, std::move(archive)).second) {
            throw ValidationError(path.string() + ": second archive for experiment " + std::to_string(id));
        }
    }
    for (const auto& set : problem.sets) {
        auto it = by_id.find(set.id);
        if (it == by_id.end()) throw ValidationError("no surrogate archive for experiment " + std::to_string(set.id));
        problem.predictors.push_back(surrogate_predictor(it->second, set, problem.space));
        problem.archives.push_back(it->second);
    }
    return problem;
}

namespace {

ConsistentDataOutcome run_consistency(const Problem& problem, const CalibrationInputs& inputs, std::ostream& log)
{
    ConsistentDataOutcome outcome;
    const auto& config = inputs.config;
    for (std::size_t d = 0; d < problem.sets.size(); ++d) {
        const auto& set = problem.sets[d];
        auto result = calibrate_beta(set, config.beta_grid, problem.predictors[d], setup_for(problem, config, set.id));
        const auto& report = result.report;
        for (const auto& c : report.candidates) {
            if (c.failed) log << "warning: experiment " << set.id << " beta " << io::format_double(c.beta) << " failed: " << c.failure << '\n';
        }
        log << "experiment " << set.id << ": beta = " << io::format_double(report.best().beta)
            << ", rho = " << io::format_double(report.best().rho) << (report.consistent ? "" : "  (inconsistent)") << '\n';
        outcome.all_consistent = outcome.all_consistent && report.consistent;
        const auto suffix = id_suffix(set.id);
        io::write_text(inputs.out_dir / ("consistency" + suffix + ".csv"), format_consistency_csv(report));
        io::write_text(inputs.out_dir / ("consistency" + suffix + "_stations.csv"),
                       format_consistency_stations_csv(report, set));
        io::write_text(inputs.out_dir / ("synthetic" + suffix + ".csv"), format_synthetic_csv(result.collection));
        outcome.betas.push_back(std::move(result));
    }
    return outcome;
}

void write_joint_artifacts(const Problem& problem, const JointCalibration& joint, const fs::path& out_dir)
{
    io::write_text(out_dir / "map.csv", format_map_csv(joint.map, problem.space, joint.retained));
    for (const auto& summary : joint.summaries) {
        io::write_text(out_dir / ("pushforward" + id_suffix(summary.experiment_id) + ".csv"),
                       format_pushforward_csv(summary));
    }
}

std::string run_manifest(const Problem& problem, const CalibrationInputs& inputs, const CalibrateOutcome& outcome)
{
    const auto& config = inputs.config;
    std::ostringstream out;
    out << "# dfi calibration run; rerun with `dfi calibrate --config run_config.cfg` on the inputs below\n";
    out << "[inputs]\n";
    out << "manifest " << inputs.manifest.string() << ' ' << file_digest(inputs.manifest) << '\n';
    for (const auto& entry : load_manifest(inputs.manifest)) {
        out << "data." << entry.id << ' ' << entry.path.string() << ' ' << file_digest(entry.path) << '\n';
    }
    out << "bounds " << inputs.bounds.string() << ' ' << file_digest(inputs.bounds) << '\n';
    for (const auto& path : inputs.archives) out << "archive " << path.string() << ' ' << file_digest(path) << '\n';
    out << "parameter_checksum " << problem.space.checksum() << '\n';
    out << "[config]\n" << config.format();
    out << "[seeds]\n";
    for (const auto& b : outcome.consistency.betas) {
        out << "synthetic." << b.report.experiment_id << " = " << b.report.data_seed << '\n';
        out << "beta_chain." << b.report.experiment_id << " = " << b.report.best().seed << '\n';
    }
    out << "joint_chain = " << outcome.joint.chain.seed << '\n';
    out << "[results]\n";
    for (const auto& b : outcome.consistency.betas) {
        const auto id = b.report.experiment_id;
        out << "beta." << id << " = " << io::format_double(b.report.best().beta) << '\n';
        out << "rho." << id << " = " << io::format_double(b.report.best().rho) << '\n';
        out << "consistent." << id << " = " << (b.report.consistent ? "true" : "false") << '\n';
        out << "retained." << id << " = " << b.report.best().retained << '\n';
    }
    out << "acceptance = " << io::format_double(outcome.joint.chain.acceptance_rate()) << '\n';
    out << "retained = " << outcome.joint.retained.rows() << '\n';
    out << "map.log_posterior = " << io::format_double(outcome.joint.map.log_posterior) << '\n';
    for (std::size_t j = 0; j < problem.space.size(); ++j) {
        out << "map." << problem.space[j].name << " = " << io::format_double(outcome.joint.map.nu[j]) << '\n';
    }
    return out.str();
}

} // namespace

ConsistentDataOutcome consistent_data_command(const CalibrationInputs& inputs, std::ostream& log)
{
    const auto problem = load_problem(inputs);
    return run_consistency(problem, inputs, log);
}

CalibrateOutcome calibrate_command(const CalibrationInputs& inputs, std::ostream& log)
{
    const auto problem = load_problem(inputs);
    const auto& config = inputs.config;
    CalibrateOutcome outcome;
    outcome.consistency = run_consistency(problem, inputs, log);

    std::vector<SyntheticDataCollection> collections;
    for (const auto& b : outcome.consistency.betas) collections.push_back(b.collection);
    InferenceSetup setup = setup_for(problem, config, problem.sets.front().id);
    outcome.joint = joint_calibrate(collections, problem.sets, problem.predictors, config.weights, setup);
    const auto& joint = outcome.joint;
    if (joint.warm_start_stalled) log << "warning: warm start found no ascent direction; chain starts at nominal values\n";

    io::write_text(inputs.out_dir / "chain.csv", format_chain_csv(joint.chain, problem.space.names()));
    write_joint_artifacts(problem, joint, inputs.out_dir);
    for (std::size_t j = 0; j < problem.space.size(); ++j) {
        io::write_text(inputs.out_dir / "traces" / (problem.space[j].name + ".csv"),
                       format_trace_csv(joint.chain, problem.space, j, config.subsample));
    }
    io::write_text(inputs.out_dir / "run_config.cfg", config.format());
    io::write_text(inputs.out_dir / "run_manifest.txt", run_manifest(problem, inputs, outcome));
    log << "joint chain: " << joint.chain.size() << " steps, acceptance "
        << io::format_double(joint.chain.acceptance_rate()) << ", " << joint.retained.rows() << " retained\n";
    for (std::size_t j = 0; j < problem.space.size(); ++j) {
        log << "  MAP " << problem.space[j].name << " = " << io::format_double(joint.map.nu[j]) << '\n';
    }
    return outcome;
}

std::vector<PushforwardSummary> pushforward_command(const CalibrationInputs& inputs, const fs::path& chain_file,
                                                    std::ostream& log)
{
    const auto problem = load_problem(inputs);
    std::vector<std::string> names;
    JointCalibration joint;
    joint.chain = parse_chain_csv(io::read_text(chain_file), chain_file.string(), &names);
    if (names != problem.space.names()) {
        throw ValidationError(chain_file.string() + ": chain parameters do not match the bounds file");
    }
    joint.retained = postprocess(joint.chain, inputs.config.burn_in, inputs.config.subsample);
    joint.map = map_estimate(joint.chain);
    for (std::size_t d = 0; d < problem.sets.size(); ++d) {
        const Matrix pushed = pushforward(joint.retained, problem.predictors[d]);
        joint.summaries.push_back(summarize_pushforward(pushed, problem.predictors[d](joint.map.nu), problem.sets[d]));
    }
    write_joint_artifacts(problem, joint, inputs.out_dir);
    log << "pushforward from " << joint.retained.rows() << " retained samples\n";
    return joint.summaries;
}

std::string report_command(const fs::path& out_dir)
{
    const fs::path manifest = out_dir / "run_manifest.txt";
    if (!fs::exists(manifest)) throw ValidationError(out_dir.string() + ": no run_manifest.txt; run `dfi calibrate` first");
    std::ostringstream out;
    out << "Calibration report for " << out_dir.string() << "\n\n";

    std::istringstream in(io::read_text(manifest));
    std::string line;
    bool in_results = false;
    out << "Results\n";
    while (std::getline(in, line)) {
        if (line.rfind('[', 0) == 0) {
            in_results = line == "[results]";
            continue;
        }
        if (in_results) out << "  " << line << '\n';
    }

    std::vector<fs::path> pushforward_files;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("pushforward_", 0) == 0 && entry.path().extension() == ".csv") pushforward_files.push_back(entry.path());
    }
    std::sort(pushforward_files.begin(), pushforward_files.end());
    out << "\nPushforward\n";
    for (const auto& path : pushforward_files) {
        const auto table = io::read_csv(path);
        const auto col = [&](const std::string& name) {
            auto it = std::find(table.header.begin(), table.header.end(), name);
            if (it == table.header.end()) throw ValidationError(path.string() + ": missing column '" + name + "'");
            return static_cast<std::size_t>(it - table.header.begin());
        };
        const auto c_mean = col("mean");
        const auto c_band = col("three_sigma");
        const auto c_y = col("y");
        const auto c_s = col("s");
        std::size_t covered = 0;
        std::vector<double> s;
        std::vector<double> band;
        for (const auto& row : table.rows) {
            const std::string where = path.string() + " row " + std::to_string(row.line);
            const double mean = io::parse_double(row.fields.at(c_mean), where);
            const double y = io::parse_double(row.fields.at(c_y), where);
            s.push_back(io::parse_double(row.fields.at(c_s), where));
            band.push_back(io::parse_double(row.fields.at(c_band), where));
            if (std::abs(mean - y) <= s.back()) ++covered;
        }
        out << "  " << path.filename().string() << ": " << table.rows.size() << " stations, mean within error bar at "
            << covered << ", rel. l2(s, 3 sigma) = " << io::format_double(consistency_distance(s, band)) << '\n';
    }
    const fs::path map = out_dir / "map.csv";
    if (fs::exists(map)) out << "\nMAP and posterior moments\n" << io::read_text(map);
    return out.str();
}

CalibrationConfig demo_config()
{
    CalibrationConfig config;
    config.pce_order = 6;
    config.prune_tau = 1e-6;
    config.synthetic_k = 20;
    config.mcmc_steps = 50'000;
    config.burn_in = 10'000;
    config.subsample = 5;
    config.beta_grid = logspace(0.02, 2.0, 10);
    config.master_seed = 2024;
    return config;
}

std::vector<double> demo_temperatures()
{
    std::vector<double> t;
    for (int n = 0; n < 8; ++n) t.push_back(1000.0 + 500.0 * n / 7.0);
    return t;
}

testmodels::ArrheniusTruth demo_truth()
{
    testmodels::ArrheniusTruth truth;
    truth.q = 1.03;
    truth.log10w = 0.15;
    return truth;
}

ParameterSpace demo_space()
{
    return testmodels::arrhenius_space(0.9, 1.1, -0.5, 0.5);
}

DemoOutcome demo_command(const DemoOptions& options, std::ostream& log)
{
    CalibrationConfig config = demo_config();
    for (const auto& assignment : options.overrides) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' must be key=value");
        config.set(io::trim(assignment.substr(0, eq)), io::trim(assignment.substr(eq + 1)));
    }
    config.validate();
    const auto& dir = options.out_dir;

    DemoOutcome outcome;
    const auto temps = demo_temperatures();
    outcome.problem = testmodels::make_synthetic_problem(demo_truth(), temps, 0.05, options.experiments,
                                                         derive_seed(config.master_seed, "demo-problem"));
    const auto space = demo_space();
    write_parameter_space(dir / "bounds.csv", space);
    io::write_text(dir / "truth.csv", testmodels::format_truth_csv(outcome.problem.truth));
    io::write_text(dir / "demo.cfg", config.format());

    std::vector<ExperimentEntry> entries;
    CalibrationInputs inputs;
    inputs.manifest = dir / "manifest.csv";
    inputs.bounds = dir / "bounds.csv";
    inputs.config = config;
    inputs.out_dir = dir;
    for (const auto& set : outcome.problem.sets) {
        const auto suffix = id_suffix(set.id);
        io::write_text(dir / ("data" + suffix + ".csv"), format_data_summary(set));
        entries.push_back({set.id, set.label, "data" + suffix + ".csv", 1});
    }
    io::write_text(inputs.manifest, format_manifest(entries));

    for (const auto& set : outcome.problem.sets) {
        const auto suffix = id_suffix(set.id);
        const auto training = testmodels::make_training_set(
            space, temps, 400, derive_seed(config.master_seed, "demo-training", static_cast<std::uint64_t>(set.id)));
        io::write_text(dir / ("samples" + suffix + ".csv"), testmodels::format_training_csv(space, training));
        FitSurrogateOptions fit;
        fit.manifest = inputs.manifest;
        fit.bounds = inputs.bounds;
        fit.samples = dir / ("samples" + suffix + ".csv");
        fit.out = dir / ("archive" + suffix + ".txt");
        fit.experiment = set.id;
        fit.order = config.pce_order;
        fit.prune_tau = config.prune_tau;
        fit.prune_passes = config.prune_passes;
        fit.data_space = config.data_space;
        const auto fitted = fit_surrogate_command(fit);
        double worst = 0.0;
        for (const auto& st : fitted.stations) worst = std::max(worst, st.test_error);
        log << "experiment " << set.id << ": surrogates fitted, worst station test error " << io::format_double(worst) << '\n';
        inputs.archives.push_back(fit.out);
    }

    outcome.calibration = calibrate_command(inputs, log);
    const auto& joint = outcome.calibration.joint;
    const Matrix& retained = joint.retained;
    const std::vector<double> truth = {outcome.problem.truth.q, outcome.problem.truth.log10w};
    outcome.truth_recovered = true;
    std::string summary = "parameter,truth,map,posterior_sd,within_3sd\n";
    for (Eigen::Index j = 0; j < retained.cols(); ++j) {
        const double mean = retained.col(j).mean();
        const double sd = std::sqrt((retained.col(j).array() - mean).square().sum() / static_cast<double>(retained.rows() - 1));
        outcome.posterior_sd.push_back(sd);
        const auto u = static_cast<std::size_t>(j);
        const bool ok = std::abs(joint.map.nu[u] - truth[u]) <= 3.0 * sd;
        outcome.truth_recovered = outcome.truth_recovered && ok;
        summary += space[u].name + ',' + io::format_double(truth[u]) + ',' + io::format_double(joint.map.nu[u]) + ',' +
                   io::format_double(sd) + ',' + (ok ? "1" : "0") + '\n';
    }
    io::write_text(dir / "demo_summary.csv", summary);
    log << (outcome.truth_recovered ? "truth recovered: MAP within 3 posterior sd\n"
                                    : "truth NOT recovered within 3 posterior sd\n");
    return outcome;
}

} // namespace dfi::app
