#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "driftbench/config.hpp"
#include "driftbench/report.hpp"
#include "driftbench/runner.hpp"
#include "driftbench/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Privacy-drift workbench: incremental and federated training with"
                 " membership-inference tracking"};
    app.set_version_flag("--version", driftbench::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string results_dir;
    std::uint64_t seed_override = 0;
    std::size_t jobs = 1;

    CLI::App* partition =
        app.add_subcommand("partition", "Build the four non-IID splits and write splits.json");
    partition->add_option("config", config_path, "Experiment config (.json or .toml)")
        ->required();
    CLI::Option* partition_seed = partition->add_option(
        "--seed-override", seed_override, "Replace every experiment seed with streams of this");
    partition->add_option("--out-dir", out_dir, "Override the config's output directory");

    CLI::App* run = app.add_subcommand(
        "run", "Run the full paradigms x client-counts x permutations matrix");
    run->add_option("config", config_path, "Experiment config (.json or .toml)")->required();
    run->add_option("--jobs", jobs, "Matrix cells to run in parallel")
        ->check(CLI::PositiveNumber);
    CLI::Option* run_seed = run->add_option(
        "--seed-override", seed_override, "Replace every experiment seed with streams of this");
    run->add_option("--out-dir", out_dir, "Override the config's output directory");

    CLI::App* report = app.add_subcommand(
        "report", "Render SVG plots and a correlation table from a results directory");
    report->add_option("results_dir", results_dir, "Directory produced by `run`")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(report)) {
            driftbench::cmd_report(results_dir, std::cout);
            return 0;
        }
        driftbench::ExperimentConfig cfg = driftbench::load_config_file(config_path);
        if (partition_seed->count() > 0 || run_seed->count() > 0) {
            driftbench::apply_seed_override(cfg, seed_override);
        }
        if (!out_dir.empty()) {
            cfg.out_dir = out_dir;
        }
        if (app.got_subcommand(partition)) {
            driftbench::cmd_partition(cfg);
            std::cout << "wrote " << cfg.out_dir << "/splits.json and " << cfg.out_dir
                      << "/class_histogram.csv\n";
            return 0;
        }
        const driftbench::RunOutcome outcome = driftbench::cmd_run(cfg, jobs);
        if (!outcome.all_ok) {
            std::cerr << outcome.failures.size() << " matrix cell(s) failed:\n";
            for (const driftbench::CellFailure& f : outcome.failures) {
                std::cerr << "  " << f.paradigm << " c" << f.clients << " " << f.order << ": "
                          << f.error << "\n";
            }
            return 1;
        }
        std::cout << "results written to " << outcome.out_dir.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
