#include "dfi/app.hpp"
#include "dfi/errors.hpp"
#include "dfi/io.hpp"
#include "dfi/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace dfi;
namespace fs = std::filesystem;

struct CalibrationFlags {
    fs::path manifest;
    fs::path bounds;
    std::vector<fs::path> archives;
    std::optional<fs::path> config;
    std::vector<std::string> overrides;
    fs::path out_dir = "dfi-out";
};

void add_calibration_flags(CLI::App* cmd, CalibrationFlags& f)
{
    cmd->add_option("--manifest", f.manifest, "Experiment manifest CSV (id,label,path,dim)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--bounds", f.bounds, "Calibration parameter bounds CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--archive", f.archives, "Surrogate archive, one per experiment")->required()->check(CLI::ExistingFile);
    cmd->add_option("--config", f.config, "Config file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--set", f.overrides, "Override a config key: --set mcmc.steps=1000");
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
}

app::CalibrationInputs inputs_from(const CalibrationFlags& f)
{
    app::CalibrationInputs in;
    in.manifest = f.manifest;
    in.bounds = f.bounds;
    in.archives = f.archives;
    in.config = app::resolve_config(f.config, f.overrides);
    in.out_dir = f.out_dir;
    return in;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Data-free inference: PCE surrogates, sensitivity screening and consistent-data calibration"};
    cli.require_subcommand(1);
    int workers = 0;
    cli.add_option("--workers", workers, "Worker threads for parallel stages (0 = runtime default)")->check(CLI::NonNegativeNumber);

    app::FitSurrogateOptions fit;
    std::string fit_space = "linear";
    int fit_experiment = 0;
    auto* fit_cmd = cli.add_subcommand("fit-surrogate", "Fit per-station PCE surrogates from model samples");
    fit_cmd->add_option("--manifest", fit.manifest, "Experiment manifest CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--bounds", fit.bounds, "Parameter bounds CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--samples", fit.samples, "Training samples CSV: parameters then one column per station")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit.out, "Archive to write")->required();
    fit_cmd->add_option("--report", fit.report, "Per-station error CSV (default: <out>.errors.csv)");
    fit_cmd->add_option("--experiment", fit_experiment, "Experiment id in the manifest (default: first)");
    fit_cmd->add_option("--order", fit.order, "Total polynomial order")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--prune-tau", fit.prune_tau, "Relative pruning threshold (0 disables)");
    fit_cmd->add_option("--prune-passes", fit.prune_passes, "Maximum pruning passes");
    fit_cmd->add_option("--test-fraction", fit.test_fraction, "Fraction of trailing rows held out");
    fit_cmd->add_option("--data-space", fit_space, "linear or log10")->check(CLI::IsMember({"linear", "log10"}));

    app::SensitivityOptions sens;
    auto* sens_cmd = cli.add_subcommand("sensitivity", "Total Sobol indices, ranking and truncation");
    sens_cmd->add_option("--archive", sens.archives, "Surrogate archive(s)")->required()->check(CLI::ExistingFile);
    sens_cmd->add_option("--threshold", sens.threshold, "Explained-variance threshold in (0, 1]");
    sens_cmd->add_flag("!--no-clamp", sens.clamp, "Report unclamped coverage");
    sens_cmd->add_option("--out-dir", sens.out_dir, "Output directory")->required();

    app::ReduceOptions reduce;
    std::vector<std::string> copy_names;
    auto* reduce_cmd = cli.add_subcommand("reduce", "Build the calibration parameter space");
    reduce_cmd->add_option("--bounds", reduce.bounds, "Full bounds CSV")->required()->check(CLI::ExistingFile);
    reduce_cmd->add_option("--retained", reduce.retained, "retained.txt from `sensitivity`")->check(CLI::ExistingFile);
    reduce_cmd->add_option("--copies", reduce.copies, "Parameters to copy per experiment")->delimiter(',');
    reduce_cmd->add_option("--experiments", reduce.experiments, "Experiment ids receiving copies")->delimiter(',');
    reduce_cmd->add_option("--out", reduce.out, "Bounds CSV to write")->required();

    CalibrationFlags consistent_flags;
    bool consistent_allow = false;
    auto* consistent_cmd = cli.add_subcommand("consistent-data", "Tune beta per experiment and write synthetic data");
    add_calibration_flags(consistent_cmd, consistent_flags);
    consistent_cmd->add_flag("--allow-inconsistent", consistent_allow, "Exit 0 even when rho > epsilon");

    CalibrationFlags calibrate_flags;
    bool calibrate_allow = false;
    auto* calibrate_cmd = cli.add_subcommand("calibrate", "Consistent data followed by the joint calibration");
    add_calibration_flags(calibrate_cmd, calibrate_flags);
    calibrate_cmd->add_flag("--allow-inconsistent", calibrate_allow, "Exit 0 even when rho > epsilon");

    CalibrationFlags push_flags;
    fs::path chain_file;
    auto* push_cmd = cli.add_subcommand("pushforward", "Pushforward summaries from a stored chain");
    add_calibration_flags(push_cmd, push_flags);
    push_cmd->add_option("--chain", chain_file, "chain.csv from `calibrate`")->required()->check(CLI::ExistingFile);

    fs::path report_dir;
    auto* report_cmd = cli.add_subcommand("report", "Summarize a calibration output directory");
    report_cmd->add_option("out_dir", report_dir, "Directory written by `calibrate`")->required()->check(CLI::ExistingDirectory);

    app::DemoOptions demo;
    demo.out_dir = "dfi-demo";
    bool demo_allow = false;
    auto* demo_cmd = cli.add_subcommand("demo", "Synthetic Arrhenius problem end to end");
    demo_cmd->add_option("--out-dir", demo.out_dir, "Output directory");
    demo_cmd->add_option("--set", demo.overrides, "Override a demo config key");
    demo_cmd->add_option("--experiments", demo.experiments, "Number of synthetic experiments")->check(CLI::PositiveNumber);
    demo_cmd->add_flag("--allow-inconsistent", demo_allow, "Exit 0 even when rho > epsilon");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : app::validation_failure;
    }

    try {
        kernels::set_workers(workers);
        if (*fit_cmd) {
            fit.data_space = fit_space == "log10" ? DataSpace::log10 : DataSpace::linear;
            if (fit_cmd->count("--experiment")) fit.experiment = fit_experiment;
            const auto outcome = app::fit_surrogate_command(fit);
            std::cout << "wrote " << fit.out.string() << " (" << outcome.stations.size() << " stations)\n";
        } else if (*sens_cmd) {
            app::sensitivity_command(sens, std::cout);
        } else if (*reduce_cmd) {
            const auto space = app::reduce_command(reduce);
            std::cout << "wrote " << reduce.out.string() << " (" << space.size() << " parameters)\n";
        } else if (*consistent_cmd) {
            const auto in = inputs_from(consistent_flags);
            if (workers == 0) kernels::set_workers(in.config.workers);
            const auto outcome = app::consistent_data_command(in, std::cout);
            if (!outcome.all_consistent && !consistent_allow) {
                std::cerr << "error: at least one experiment is inconsistent (rho > epsilon)\n";
                return app::inconsistent;
            }
        } else if (*calibrate_cmd) {
            const auto in = inputs_from(calibrate_flags);
            if (workers == 0) kernels::set_workers(in.config.workers);
            const auto outcome = app::calibrate_command(in, std::cout);
            if (!outcome.consistency.all_consistent && !calibrate_allow) {
                std::cerr << "error: at least one experiment is inconsistent (rho > epsilon)\n";
                return app::inconsistent;
            }
        } else if (*push_cmd) {
            const auto in = inputs_from(push_flags);
            app::pushforward_command(in, chain_file, std::cout);
        } else if (*report_cmd) {
            std::cout << app::report_command(report_dir);
        } else if (*demo_cmd) {
            const auto outcome = app::demo_command(demo, std::cout);
            if (!outcome.calibration.consistency.all_consistent && !demo_allow) {
                std::cerr << "error: at least one experiment is inconsistent (rho > epsilon)\n";
                return app::inconsistent;
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return app::validation_failure;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return app::numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return app::validation_failure;
    }
    return app::success;
}
