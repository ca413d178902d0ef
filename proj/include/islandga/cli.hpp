#ifndef ISLANDGA_CLI_HPP
#define ISLANDGA_CLI_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/driver.hpp"
#include "islandga/errors.hpp"
#include "islandga/fss.hpp"
#include "islandga/operators.hpp"
#include "islandga/persistence.hpp"

/// Batch command-line front door: configure runs, execute the driver,
/// inspect results. Configuration is a flat key=value text file; '#' starts
/// a comment. Exit codes: 0 success, 2 configuration or usage error,
/// 3 data error, 4 internal phase error.
namespace islandga::cli {

struct AppConfig {
    GaConfig ga;
    std::string problem = "onemax";
    std::optional<std::uint32_t> genome_length; // onemax
    std::optional<double> target;               // fitness / accuracy target
    std::optional<std::string> dataset;         // fss
    std::size_t folds = 5;                      // fss
    std::optional<double> train_ratio;          // fss, optional hold-out split
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" +
                          value + "'");
    return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "' expects true or false, got '" + value + "'");
}

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    if (first == std::string::npos) return "";
    return s.substr(first, last - first + 1);
}

} // namespace detail

inline AppConfig parse_config_text(std::istream& in) {
    AppConfig config;
    std::optional<std::uint64_t> migration_frequency;
    std::optional<std::uint64_t> migration_count;

    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line is not key=value: '" + trimmed + "'");
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line has an empty key");

        if (key == "problem") {
            if (value != "onemax" && value != "fss")
                throw ConfigError("config key 'problem' must be onemax or fss, got '" + value +
                                  "'");
            config.problem = value;
        } else if (key == "islands") {
            config.ga.islands = static_cast<std::uint32_t>(detail::parse_u64(key, value));
        } else if (key == "population_size") {
            config.ga.population_size = static_cast<std::uint32_t>(detail::parse_u64(key, value));
        } else if (key == "max_generations") {
            config.ga.max_generations = detail::parse_u64(key, value);
        } else if (key == "mutation_probability") {
            config.ga.mutation_probability = detail::parse_double(key, value);
        } else if (key == "elitism") {
            config.ga.elitism_enabled = detail::parse_bool(key, value);
        } else if (key == "elite_count") {
            config.ga.elite_count = static_cast<std::uint32_t>(detail::parse_u64(key, value));
        } else if (key == "migration_frequency") {
            migration_frequency = detail::parse_u64(key, value);
        } else if (key == "migration_count") {
            migration_count = detail::parse_u64(key, value);
        } else if (key == "master_seed") {
            config.ga.master_seed = detail::parse_u64(key, value);
        } else if (key == "island_seed_offset") {
            config.ga.island_seed_offset =
                static_cast<std::uint32_t>(detail::parse_u64(key, value));
        } else if (key == "threads") {
            config.ga.threads = static_cast<unsigned>(detail::parse_u64(key, value));
        } else if (key == "genome_length") {
            config.genome_length = static_cast<std::uint32_t>(detail::parse_u64(key, value));
        } else if (key == "target") {
            config.target = detail::parse_double(key, value);
        } else if (key == "dataset") {
            config.dataset = value;
        } else if (key == "folds") {
            config.folds = static_cast<std::size_t>(detail::parse_u64(key, value));
        } else if (key == "train_ratio") {
            config.train_ratio = detail::parse_double(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    if (migration_frequency || migration_count) {
        MigrationPolicyConfig policy;
        policy.frequency = migration_frequency.value_or(1);
        policy.migrant_count =
            static_cast<std::uint32_t>(migration_count.value_or(std::uint64_t{0}));
        config.ga.migration = policy;
    }
    config.ga.validate();
    return config;
}

inline AppConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse_config_text(in);
}

/// The suite plus the data the problem was built from (fss keeps the train
/// part and, when a split was requested, the test part for final scoring).
struct ProblemSetup {
    OperatorSuite suite;
    std::uint32_t genome_length = 0;
    std::optional<fss::Dataset> train;
    std::optional<fss::Dataset> test;
};

inline ProblemSetup build_problem(const AppConfig& config) {
    ProblemSetup setup;
    if (config.problem == "onemax") {
        if (!config.genome_length)
            throw ConfigError("config key 'genome_length' is required for problem=onemax");
        if (*config.genome_length < 1)
            throw ConfigError("genome_length must be >= 1");
        setup.genome_length = *config.genome_length;
        setup.suite = make_onemax_suite(setup.genome_length, config.ga, config.target);
        return setup;
    }
    if (!config.dataset)
        throw ConfigError("config key 'dataset' is required for problem=fss");
    fss::Dataset full = fss::load_dataset(*config.dataset);
    if (config.train_ratio) {
        auto [train, test] = fss::split_train_test(full, *config.train_ratio);
        setup.train = std::move(train);
        setup.test = std::move(test);
    } else {
        setup.train = std::move(full);
    }
    if (config.genome_length && *config.genome_length != setup.train->num_attributes())
        throw ConfigError("genome_length does not match the dataset's attribute count");
    setup.genome_length = static_cast<std::uint32_t>(setup.train->num_attributes());
    setup.suite = fss::fss_operator_suite(*setup.train, config.folds, config.ga, config.target);
    return setup;
}

inline int cmd_init(const std::filesystem::path& config_path,
                    const std::filesystem::path& run_dir, bool force, std::ostream& out) {
    const AppConfig config = parse_config_file(config_path);
    const ProblemSetup setup = build_problem(config);
    RunPaths paths(run_dir);
    if (paths.latest_snapshot()) {
        if (!force)
            throw ConfigError("run directory already initialised: " + run_dir.string() +
                              " (use --force to reset)");
        std::filesystem::remove_all(paths.generations_dir());
        std::filesystem::remove_all(paths.flags_dir());
        std::filesystem::remove(paths.solutions());
        std::filesystem::remove(paths.non_solutions());
        std::filesystem::remove(paths.report());
    }
    initialise(config.ga, setup.suite, paths);
    out << paths.snapshot(0).string() << "\n";
    return 0;
}

inline int cmd_run(const std::filesystem::path& config_path,
                   const std::filesystem::path& run_dir, std::optional<unsigned> threads_override,
                   std::ostream& out) {
    AppConfig config = parse_config_file(config_path);
    if (threads_override) config.ga.threads = *threads_override;
    const ProblemSetup setup = build_problem(config);
    const RunReport report = evolve(config.ga, setup.suite, run_dir);
    out << format_report(report);
    if (setup.test && report.best) {
        // Score the best mask once against the held-out part.
        const fss::Dataset train_view = setup.train->project(report.best->genome);
        const fss::Dataset test_view = setup.test->project(report.best->genome);
        const auto tree = fss::build_tree(train_view);
        out << "test_accuracy=" << format_double(fss::accuracy(tree, test_view)) << "\n";
    }
    return 0;
}

inline int cmd_filter(const std::filesystem::path& run_dir, double threshold,
                      std::ostream& out) {
    RunPaths paths(run_dir);
    const auto latest = paths.latest_snapshot();
    if (!latest) throw DataError("no snapshot found in run directory: " + run_dir.string());
    const PopulationSnapshot snapshot = read_snapshot(latest->second);
    std::vector<Individual> solutions;
    std::vector<Individual> non_solutions;
    for (const auto& island : snapshot.islands) {
        for (const auto& ind : island) {
            if (ind.fitness && *ind.fitness >= threshold)
                solutions.push_back(ind);
            else
                non_solutions.push_back(ind);
        }
    }
    const auto genome_length =
        static_cast<std::uint32_t>(snapshot.islands.front().front().genome.size());
    write_individual_list(paths.solutions(), solutions, genome_length);
    write_individual_list(paths.non_solutions(), non_solutions, genome_length);
    out << "solutions=" << solutions.size() << "\n";
    out << "non_solutions=" << non_solutions.size() << "\n";
    return 0;
}

/// One row per persisted generation: generation, best fitness, mean
/// fitness and solution count, tab-separated. Columns over individuals
/// without a fitness value print "-".
inline int cmd_stats(const std::filesystem::path& run_dir, std::ostream& out) {
    RunPaths paths(run_dir);
    const auto snapshots = paths.list_snapshots();
    if (snapshots.empty())
        throw DataError("no snapshots found in run directory: " + run_dir.string());
    for (const auto& [generation, path] : snapshots) {
        const PopulationSnapshot snapshot = read_snapshot(path);
        std::optional<double> best;
        double sum = 0.0;
        std::size_t evaluated = 0;
        std::size_t solutions = 0;
        for (const auto& island : snapshot.islands) {
            for (const auto& ind : island) {
                if (ind.is_solution) ++solutions;
                if (!ind.fitness) continue;
                ++evaluated;
                sum += *ind.fitness;
                if (!best || *ind.fitness > *best) best = *ind.fitness;
            }
        }
        out << generation << '\t' << (best ? format_double(*best) : "-") << '\t'
            << (evaluated ? format_double(sum / static_cast<double>(evaluated)) : "-") << '\t'
            << solutions << "\n";
    }
    return 0;
}

} // namespace islandga::cli

#endif // ISLANDGA_CLI_HPP
