#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "islandga/cli_main.hpp"
#include "test_util.hpp"

using namespace islandga;
using namespace islandga::cli;

namespace {

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path;
}

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("islandga");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

int cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    return cli(args, out, err);
}

const std::string kOneMaxConfig =
    "problem=onemax\n"
    "islands=1\n"
    "population_size=16\n"
    "genome_length=8\n"
    "max_generations=60\n"
    "mutation_probability=0.05\n"
    "elitism=true\n"
    "elite_count=1\n"
    "master_seed=5\n"
    "target=6\n";

} // namespace

TEST_CASE("config files parse the documented keys") {
    std::istringstream text(
        "# a comment\n"
        "problem=onemax\n"
        "islands=3\n"
        "population_size=10\n"
        "genome_length=12\n"
        "max_generations=7\n"
        "mutation_probability=0.25\n"
        "elitism=true\n"
        "elite_count=2\n"
        "migration_frequency=4\n"
        "migration_count=1\n"
        "master_seed=42\n"
        "threads=2\n"
        "target=11\n");
    const auto config = parse_config_text(text);
    CHECK(config.ga.islands == 3);
    CHECK(config.ga.population_size == 10);
    CHECK(config.genome_length == 12);
    CHECK(config.ga.max_generations == 7);
    CHECK(config.ga.mutation_probability == 0.25);
    CHECK(config.ga.elitism_enabled);
    CHECK(config.ga.elite_count == 2);
    REQUIRE(config.ga.migration.has_value());
    CHECK(config.ga.migration->frequency == 4);
    CHECK(config.ga.migration->migrant_count == 1);
    CHECK(config.ga.master_seed == 42);
    CHECK(config.ga.threads == 2);
    CHECK(config.target == 11.0);
}

TEST_CASE("config errors name the offending key") {
    std::istringstream unknown("problation=3\n");
    CHECK_THROWS_WITH(parse_config_text(unknown),
                      Catch::Matchers::ContainsSubstring("problation"));

    std::istringstream bad_value("islands=three\n");
    CHECK_THROWS_WITH(parse_config_text(bad_value),
                      Catch::Matchers::ContainsSubstring("islands"));

    std::istringstream zero_pop("population_size=0\n");
    CHECK_THROWS_WITH(parse_config_text(zero_pop),
                      Catch::Matchers::ContainsSubstring("population_size"));
}

TEST_CASE("init creates the generation-0 snapshot once") {
    test_util::TempDir dir;
    const auto config =
        write_text(dir.path() / "ga.conf",
                   "problem=onemax\nislands=1\npopulation_size=4\ngenome_length=8\n"
                   "master_seed=7\n");
    const auto run_dir = (dir.path() / "run").string();

    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli({"init", "--config", config.string(), "--run-dir", run_dir}, out, err) == 0);
    CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("gen-000000.pop"));
    CHECK(std::filesystem::exists(RunPaths(run_dir).snapshot(0)));

    SECTION("a second init without --force is refused") {
        std::ostringstream err2;
        std::ostringstream out2;
        CHECK(cli({"init", "--config", config.string(), "--run-dir", run_dir}, out2, err2) == 2);
        CHECK_THAT(err2.str(), Catch::Matchers::ContainsSubstring("--force"));
    }

    SECTION("--force resets the directory") {
        CHECK(cli({"init", "--config", config.string(), "--run-dir", run_dir, "--force"}) == 0);
    }
}

TEST_CASE("invalid population size exits with the usage code naming the key") {
    test_util::TempDir dir;
    const auto config = write_text(dir.path() / "ga.conf",
                                   "problem=onemax\npopulation_size=0\ngenome_length=4\n");
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli({"init", "--config", config.string(), "--run-dir", (dir.path() / "r").string()},
              out, err) == 2);
    CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("population_size"));
}

TEST_CASE("run executes onemax to the target and fills the run directory") {
    test_util::TempDir dir;
    const auto config = write_text(dir.path() / "ga.conf", kOneMaxConfig);
    const auto run_dir = (dir.path() / "run").string();

    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli({"run", "--config", config.string(), "--run-dir", run_dir}, out, err) == 0);
    CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("stop_reason=criterion_satisfied"));

    RunPaths paths(run_dir);
    CHECK(std::filesystem::exists(paths.report()));
    CHECK_FALSE(read_individual_list(paths.solutions()).empty());

    SECTION("stats prints one deterministic row per generation") {
        std::ostringstream stats1;
        std::ostringstream errs;
        REQUIRE(cli({"stats", "--run-dir", run_dir}, stats1, errs) == 0);
        const std::string table = stats1.str();
        const auto rows = static_cast<std::size_t>(
            std::count(table.begin(), table.end(), '\n'));
        CHECK(rows == paths.list_snapshots().size());
        // Generation 0 was never evaluated: best and mean print "-".
        CHECK_THAT(table, Catch::Matchers::StartsWith("0\t-\t-\t0\n"));

        // A bit-identical rerun produces a bit-identical table.
        test_util::TempDir rerun;
        const auto rerun_dir = (rerun.path() / "run").string();
        REQUIRE(cli({"run", "--config", config.string(), "--run-dir", rerun_dir}) == 0);
        std::ostringstream stats2;
        REQUIRE(cli({"stats", "--run-dir", rerun_dir}, stats2, errs) == 0);
        CHECK(stats2.str() == table);
    }

    SECTION("filter re-partitions the final population") {
        std::ostringstream fout;
        std::ostringstream ferr;
        REQUIRE(cli({"filter", "--run-dir", run_dir, "--threshold", "0"}, fout, ferr) == 0);
        const auto all = read_individual_list(paths.solutions());
        CHECK(all.size() == 16);
        CHECK(read_individual_list(paths.non_solutions()).empty());

        REQUIRE(cli({"filter", "--run-dir", run_dir, "--threshold", "1e9"}) == 0);
        CHECK(read_individual_list(paths.solutions()).empty());
        CHECK(read_individual_list(paths.non_solutions()).size() == 16);

        // Threshold exactly at the maximum keeps the best individuals.
        const auto snapshot = read_snapshot(paths.latest_snapshot()->second);
        double max_fitness = 0.0;
        for (const auto& island : snapshot.islands)
            for (const auto& ind : island)
                if (ind.fitness) max_fitness = std::max(max_fitness, *ind.fitness);
        REQUIRE(cli({"filter", "--run-dir", run_dir, "--threshold",
                     format_double(max_fitness)}) == 0);
        CHECK_FALSE(read_individual_list(paths.solutions()).empty());
    }
}

TEST_CASE("run on an fss dataset without a target goes to max generations") {
    test_util::TempDir dir;
    const auto data = write_text(dir.path() / "train.csv",
                                 "x,y,class\n1,a,yes\n2,b,no\n3,a,yes\n4,b,no\n"
                                 "5,a,yes\n6,b,no\n7,a,yes\n8,b,no\n");
    const auto config = write_text(dir.path() / "fss.conf",
                                   "problem=fss\ndataset=" + data.string() +
                                       "\nislands=1\npopulation_size=4\nmax_generations=3\n"
                                       "mutation_probability=0.1\nfolds=2\nmaster_seed=9\n");
    const auto run_dir = (dir.path() / "run").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli({"run", "--config", config.string(), "--run-dir", run_dir}, out, err) == 0);
    CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("stop_reason=max_generations"));
    CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("generations=3"));
    CHECK(RunPaths(run_dir).list_snapshots().size() == 4);
}

TEST_CASE("fss with a train/test split reports the held-out accuracy") {
    test_util::TempDir dir;
    std::string csv = "x,class\n";
    for (int i = 0; i < 20; ++i)
        csv += std::to_string(i) + (i < 10 ? ",lo\n" : ",hi\n");
    const auto data = write_text(dir.path() / "train.csv", csv);
    const auto config = write_text(dir.path() / "fss.conf",
                                   "problem=fss\ndataset=" + data.string() +
                                       "\npopulation_size=4\nmax_generations=2\n"
                                       "mutation_probability=0.1\nfolds=2\ntrain_ratio=0.6\n"
                                       "master_seed=4\n");
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli({"run", "--config", config.string(), "--run-dir",
                 (dir.path() / "run").string()},
                out, err) == 0);
    CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("test_accuracy="));
}

TEST_CASE("a missing dataset file is a data error naming the path") {
    test_util::TempDir dir;
    const auto config = write_text(dir.path() / "fss.conf",
                                   "problem=fss\ndataset=/no/such/data.csv\n"
                                   "population_size=4\n");
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli({"run", "--config", config.string(), "--run-dir",
               (dir.path() / "run").string()},
              out, err) == 3);
    CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("/no/such/data.csv"));
}

TEST_CASE("filter and stats require an initialised run directory") {
    test_util::TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli({"filter", "--run-dir", (dir.path() / "empty").string(), "--threshold", "1"},
              out, err) == 3);
    CHECK(cli({"stats", "--run-dir", (dir.path() / "empty").string()}, out, err) == 3);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(cli({"frobnicate"}) == 2);
    CHECK(cli({"run"}) == 2); // missing required options
    CHECK(cli({}) == 2);      // missing subcommand
}
