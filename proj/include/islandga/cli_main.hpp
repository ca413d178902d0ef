#ifndef ISLANDGA_CLI_MAIN_HPP
#define ISLANDGA_CLI_MAIN_HPP

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "islandga/cli.hpp"
#include "islandga/errors.hpp"

namespace islandga::cli {

/// Full command-line entry point. Exit codes: 0 success, 2 configuration
/// or usage error, 3 data error, 4 internal phase error.
inline int run_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"island-model genetic algorithms on an embedded map-shuffle-reduce engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_dir;
    bool force = false;
    double threshold = 0.0;
    std::optional<unsigned> threads;

    auto* init = app.add_subcommand("init", "Create a run directory with a generation-0 snapshot");
    init->add_option("--config", config_path, "Configuration file")->required();
    init->add_option("--run-dir", run_dir, "Run directory")->required();
    init->add_flag("--force", force, "Reset an already initialised run directory");

    auto* run = app.add_subcommand("run", "Run the evolution loop and write the report");
    run->add_option("--config", config_path, "Configuration file")->required();
    run->add_option("--run-dir", run_dir, "Run directory")->required();
    run->add_option("--threads", threads, "Worker threads (0 = hardware parallelism)");

    auto* filter = app.add_subcommand(
        "filter", "Re-partition the latest population by a fitness threshold");
    filter->add_option("--run-dir", run_dir, "Run directory")->required();
    filter->add_option("--threshold", threshold, "Inclusive fitness threshold")->required();

    auto* stats = app.add_subcommand("stats", "Print a per-generation fitness table");
    stats->add_option("--run-dir", run_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (init->parsed()) return cmd_init(config_path, run_dir, force, out);
        if (run->parsed()) return cmd_run(config_path, run_dir, threads, out);
        if (filter->parsed()) return cmd_filter(run_dir, threshold, out);
        if (stats->parsed()) return cmd_stats(run_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

} // namespace islandga::cli

#endif // ISLANDGA_CLI_MAIN_HPP
