#ifndef ISLANDGA_DRIVER_HPP
#define ISLANDGA_DRIVER_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/errors.hpp"
#include "islandga/persistence.hpp"
#include "islandga/pipeline.hpp"
#include "islandga/rng.hpp"

/// The orchestration loop running outside the executor: initialise,
/// iterate generations, check stopping conditions, schedule migrations,
/// filter solutions. The driver is single-threaded; all parallelism lives
/// in the executor. Not reentrant for the same run directory.
namespace islandga {

struct RunState {
    GaConfig config;
    std::uint64_t current_generation = 0;
    std::filesystem::path snapshot_path;
    bool flags_seen = false;
};

enum class TerminationDecision { continue_run, stop };

/// Stop when the generation counter reached the maximum or any termination
/// flag exists for the latest generation.
inline TerminationDecision check_termination(const RunState& state,
                                             std::span<const TerminationFlag> latest_flags) {
    if (!latest_flags.empty()) return TerminationDecision::stop;
    if (state.current_generation >= state.config.max_generations)
        return TerminationDecision::stop;
    return TerminationDecision::continue_run;
}

/// Produces the generation-0 snapshot via the suite's initialiser and
/// persists it. Skipped (the existing snapshot is loaded instead) when the
/// run directory already holds one.
inline PopulationSnapshot initialise(const GaConfig& config, const OperatorSuite& suite,
                                     const RunPaths& paths) {
    config.validate();
    paths.ensure_layout();
    if (const auto existing = paths.latest_snapshot())
        return read_snapshot(existing->second);
    if (!suite.initialiser)
        throw ConfigError("operator suite has no initialiser");
    PopulationSnapshot snapshot;
    snapshot.generation = 0;
    snapshot.islands.resize(config.islands);
    for (std::uint32_t i = 0; i < config.islands; ++i) {
        StreamRng rng = phase_stream(config.master_seed, 0, phase_name::initialise,
                                     config.island_seed_offset + i);
        snapshot.islands[i] = suite.initialiser(config.population_size, rng);
        if (snapshot.islands[i].size() != config.population_size)
            throw ContractError("initialiser returned wrong island size");
    }
    write_snapshot(paths.snapshot(0), snapshot, config.master_seed);
    return snapshot;
}

/// Moves `migrant_count` uniformly selected individuals (without
/// replacement) from every island to its destination. All moves are
/// computed against the pre-migration snapshot; survivors keep their order
/// and migrants are appended in draw order. A single island is left
/// untouched (its ring destination is itself).
inline PopulationSnapshot migrate(const PopulationSnapshot& snapshot,
                                  const MigrationPolicyConfig& policy, const GaConfig& config) {
    const auto num_islands = static_cast<std::uint32_t>(snapshot.islands.size());
    if (num_islands <= 1 || policy.migrant_count == 0) return snapshot;

    std::vector<std::uint32_t> destination(num_islands);
    std::vector<std::vector<std::size_t>> leaving(num_islands);
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        destination[i] = policy.destination(i, num_islands);
        if (destination[i] == i) continue; // self-loop: nothing moves
        const auto& island = snapshot.islands[i];
        if (policy.migrant_count > island.size())
            throw ConfigError("migration_count exceeds island size");
        StreamRng rng = phase_stream(config.master_seed, snapshot.generation,
                                     phase_name::migration, config.island_seed_offset + i);
        // Partial Fisher-Yates: the first migrant_count entries, in draw order.
        std::vector<std::size_t> indices(island.size());
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        for (std::uint32_t k = 0; k < policy.migrant_count; ++k) {
            const auto j = k + static_cast<std::size_t>(rng.uniform_below(indices.size() - k));
            std::swap(indices[k], indices[j]);
        }
        leaving[i].assign(indices.begin(), indices.begin() + policy.migrant_count);
    }

    PopulationSnapshot out;
    out.generation = snapshot.generation;
    out.islands.resize(num_islands);
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        std::vector<bool> gone(snapshot.islands[i].size(), false);
        for (std::size_t idx : leaving[i]) gone[idx] = true;
        for (std::size_t j = 0; j < snapshot.islands[i].size(); ++j)
            if (!gone[j]) out.islands[i].push_back(snapshot.islands[i][j]);
    }
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        for (std::size_t idx : leaving[i])
            out.islands[destination[i]].push_back(snapshot.islands[i][idx]);
    }
    return out;
}

/// Partitions the individuals of a snapshot into those satisfying the
/// criterion and those which do not, preserving island-major order.
inline std::pair<std::vector<Individual>, std::vector<Individual>> filter_solutions(
    const PopulationSnapshot& snapshot, const OperatorSuite::TerminationCriterion& criterion) {
    if (!criterion) throw ContractError("filter_solutions requires a termination criterion");
    std::vector<Individual> solutions;
    std::vector<Individual> non_solutions;
    for (const auto& island : snapshot.islands) {
        for (const auto& ind : island) {
            if (criterion(ind))
                solutions.push_back(ind);
            else
                non_solutions.push_back(ind);
        }
    }
    return {std::move(solutions), std::move(non_solutions)};
}

namespace detail {
inline void track_best(std::optional<Individual>& best, const PopulationSnapshot& snapshot) {
    for (const auto& island : snapshot.islands) {
        for (const auto& ind : island) {
            if (!ind.fitness) continue;
            if (!best || individual_precedes(ind, *best)) best = ind;
        }
    }
}
} // namespace detail

/// The full run: initialise (unless a snapshot already exists), then
/// repeat { run one generation, persist, check termination, migrate when
/// due } until a stop condition holds. A flag stop triggers the solutions
/// filter. Every generation's snapshot is persisted, so interrupted runs
/// resume from the latest complete generation.
inline RunReport evolve(const GaConfig& config, const OperatorSuite& suite,
                        const std::filesystem::path& run_dir) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    RunPaths paths(run_dir);
    paths.ensure_layout();

    PopulationSnapshot snapshot = initialise(config, suite, paths);
    RunState state{config, snapshot.generation, paths.snapshot(snapshot.generation), false};

    std::optional<Individual> best;
    detail::track_best(best, snapshot);

    // On resume, flags persisted for the loaded generation still count.
    std::vector<TerminationFlag> latest_flags = paths.read_flags(snapshot.generation);

    while (check_termination(state, latest_flags) == TerminationDecision::continue_run) {
        FlagSink sink = [&paths](const TerminationFlag& flag) {
            write_flag(paths.flag(flag.generation, flag.island.value), flag);
        };
        GenerationResult result = run_generation(snapshot, suite, config, sink);
        snapshot = std::move(result.snapshot);
        latest_flags = std::move(result.flags);
        write_snapshot(paths.snapshot(snapshot.generation), snapshot, config.master_seed);
        state.current_generation = snapshot.generation;
        state.snapshot_path = paths.snapshot(snapshot.generation);
        state.flags_seen = !latest_flags.empty();
        detail::track_best(best, snapshot);

        if (latest_flags.empty() && config.migration &&
            snapshot.generation % config.migration->frequency == 0) {
            snapshot = migrate(snapshot, *config.migration, config);
            write_snapshot(state.snapshot_path, snapshot, config.master_seed);
            detail::track_best(best, snapshot);
        }
    }

    RunReport report;
    report.generations = state.current_generation;
    report.stop_reason = latest_flags.empty() ? StopReason::max_generations
                                              : StopReason::criterion_satisfied;
    report.best = best;
    report.final_snapshot = state.snapshot_path;

    if (report.stop_reason == StopReason::criterion_satisfied) {
        auto [solutions, non_solutions] = filter_solutions(snapshot, suite.termination_criterion);
        const auto genome_length =
            static_cast<std::uint32_t>(snapshot.islands.front().front().genome.size());
        write_individual_list(paths.solutions(), solutions, genome_length);
        write_individual_list(paths.non_solutions(), non_solutions, genome_length);
    }

    report.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              started)
            .count());
    write_report(paths.report(), report);
    return report;
}

} // namespace islandga

#endif // ISLANDGA_DRIVER_HPP
