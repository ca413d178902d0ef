#ifndef ISLANDGA_PIPELINE_HPP
#define ISLANDGA_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/errors.hpp"
#include "islandga/executor.hpp"
#include "islandga/operators.hpp"
#include "islandga/rng.hpp"

/// One GA generation expressed as a chain job over islands: the splitter,
/// fitness, termination check and selection run as chained maps, crossover
/// is the reduce (one partition per island), mutation and elitism run as
/// post-maps on the reduce output.
namespace islandga {

/// Routes the two parents of one selected couple to the same reduce group.
struct CoupleKey {
    IslandId island;
    std::uint32_t couple_index = 0;
    friend bool operator==(const CoupleKey&, const CoupleKey&) = default;
};

/// Island-scoped passthrough key: carries individuals that must reach the
/// island's reducer without being part of a couple (the previous population
/// when elitism is active).
struct IslandKey {
    IslandId island;
    friend bool operator==(const IslandKey&, const IslandKey&) = default;
};

/// Couple keys order before passthrough keys; within couples, by couple
/// index. The byte encoding realizes that order lexicographically.
using PhaseKey = std::variant<CoupleKey, IslandKey>;

inline IslandId key_island(const PhaseKey& key) {
    return std::visit([](const auto& k) { return k.island; }, key);
}

struct PhaseValue {
    Individual individual;
    bool offspring = false;
    friend bool operator==(const PhaseValue&, const PhaseValue&) = default;
};

using PhaseRecord = mr::Record<PhaseKey, PhaseValue>;

/// Raised by the termination check when an individual satisfies the
/// criterion; at most one per (generation, island). `generation` is the
/// index of the snapshot whose population contains the marked individual.
struct TerminationFlag {
    std::uint64_t generation = 0;
    IslandId island;
    Individual satisfying_individual;
};

using FlagSink = std::function<void(const TerminationFlag&)>;

/// Shared flag visibility within one generation job. Islands raise flags
/// concurrently during the check stage; the stage barrier makes the
/// collected set deterministic before any later phase reads it.
class FlagBoard {
public:
    void raise(TerminationFlag flag) {
        std::lock_guard<std::mutex> lock(mutex_);
        flags_.push_back(std::move(flag));
        any_.store(true, std::memory_order_release);
    }

    bool any() const { return any_.load(std::memory_order_acquire); }

    std::vector<TerminationFlag> sorted_flags() const {
        std::lock_guard<std::mutex> lock(mutex_);
        std::vector<TerminationFlag> out = flags_;
        std::sort(out.begin(), out.end(), [](const TerminationFlag& a, const TerminationFlag& b) {
            return a.island.value < b.island.value;
        });
        return out;
    }

private:
    mutable std::mutex mutex_;
    std::vector<TerminationFlag> flags_;
    std::atomic<bool> any_{false};
};

} // namespace islandga

namespace islandga::mr {
template <>
struct KeyTraits<islandga::PhaseKey> {
    static void append_bytes(const islandga::PhaseKey& key, std::vector<std::uint8_t>& out) {
        if (const auto* couple = std::get_if<islandga::CoupleKey>(&key)) {
            out.push_back(0);
            detail::append_uint_be(out, couple->island.value);
            detail::append_uint_be(out, couple->couple_index);
        } else {
            const auto& pass = std::get<islandga::IslandKey>(key);
            out.push_back(1);
            detail::append_uint_be(out, pass.island.value);
            detail::append_uint_be(out, std::uint32_t{0});
        }
    }
};
} // namespace islandga::mr

namespace islandga {

/// Splits the population into J islands contiguously, preserving
/// individual order; earlier islands take the remainder when the total is
/// not divisible. Emits one passthrough-keyed record per individual.
inline std::vector<std::vector<PhaseRecord>> split_population(const PopulationSnapshot& snapshot,
                                                              std::uint32_t num_islands) {
    if (num_islands < 1) throw ConfigError("islands must be >= 1");
    const std::size_t total = snapshot.total_individuals();
    if (total < num_islands)
        throw ConfigError("population has fewer individuals than islands");
    std::vector<const Individual*> all;
    all.reserve(total);
    for (const auto& island : snapshot.islands)
        for (const auto& ind : island) all.push_back(&ind);

    std::vector<std::vector<PhaseRecord>> splits(num_islands);
    const std::size_t base = total / num_islands;
    const std::size_t remainder = total % num_islands;
    std::size_t cursor = 0;
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        const std::size_t size = base + (i < remainder ? 1 : 0);
        splits[i].reserve(size);
        for (std::size_t j = 0; j < size; ++j) {
            splits[i].push_back(
                PhaseRecord{IslandKey{IslandId{i}}, PhaseValue{*all[cursor++], false}});
        }
    }
    return splits;
}

/// Evaluates fitness for every individual that does not have one yet;
/// already-evaluated individuals pass through untouched. No evaluator means
/// passthrough.
inline std::vector<PhaseRecord> fitness_phase(std::span<const PhaseRecord> records,
                                              const OperatorSuite::FitnessEvaluator& evaluator) {
    std::vector<PhaseRecord> out(records.begin(), records.end());
    if (!evaluator) return out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Individual& ind = out[i].value.individual;
        if (ind.fitness) continue;
        double value;
        try {
            value = evaluator(ind.genome);
        } catch (const std::exception& e) {
            throw ContractError("fitness evaluation failed for individual " + std::to_string(i) +
                                ": " + e.what());
        }
        if (value < 0.0 || std::isnan(value))
            throw ContractError("fitness of individual " + std::to_string(i) +
                                " must be a non-negative number");
        ind.fitness = value;
    }
    return out;
}

/// Marks satisfying individuals and reports the island's flag (carrying the
/// first satisfying individual) if any. Records are otherwise unchanged.
inline std::pair<std::vector<PhaseRecord>, std::optional<TerminationFlag>>
termination_check_phase(std::span<const PhaseRecord> records,
                        const OperatorSuite::TerminationCriterion& criterion, IslandId island,
                        std::uint64_t flag_generation) {
    std::vector<PhaseRecord> out(records.begin(), records.end());
    std::optional<TerminationFlag> flag;
    if (!criterion) return {std::move(out), flag};
    for (auto& rec : out) {
        Individual& ind = rec.value.individual;
        if (criterion(ind)) {
            ind.is_solution = true;
            if (!flag) flag = TerminationFlag{flag_generation, island, ind};
        }
    }
    return {std::move(out), flag};
}

/// Chooses the parents: the selector produces `num_couples` index pairs,
/// every selected parent is emitted once per selection under its couple
/// key (so repeated picks are replicated). When `emit_previous` is set the
/// whole island additionally travels under the passthrough key so the
/// reducer sees the previous population. A null selector forwards the
/// input unchanged.
inline std::vector<PhaseRecord> selection_phase(std::span<const PhaseRecord> records,
                                                const OperatorSuite::SelectionOperator& selector,
                                                bool emit_previous, std::size_t num_couples,
                                                IslandId island, StreamRng& rng) {
    if (!selector) return std::vector<PhaseRecord>(records.begin(), records.end());
    std::vector<Individual> individuals;
    individuals.reserve(records.size());
    for (const auto& rec : records) individuals.push_back(rec.value.individual);
    if (individuals.size() < 2 && num_couples > 0)
        throw ContractError("selection requires an island of at least 2 individuals");

    const auto couples = selector(std::span<const Individual>(individuals), num_couples, rng);
    if (couples.size() != num_couples)
        throw ContractError("selection operator returned wrong number of couples");

    std::vector<PhaseRecord> out;
    out.reserve(2 * couples.size() + (emit_previous ? individuals.size() : 0));
    for (std::size_t c = 0; c < couples.size(); ++c) {
        const auto [first, second] = couples[c];
        if (first >= individuals.size() || second >= individuals.size())
            throw ContractError("selection operator returned an out-of-range parent index");
        const CoupleKey key{island, static_cast<std::uint32_t>(c)};
        out.push_back(PhaseRecord{key, PhaseValue{individuals[first], false}});
        out.push_back(PhaseRecord{key, PhaseValue{individuals[second], false}});
    }
    if (emit_previous) {
        for (const auto& ind : individuals)
            out.push_back(PhaseRecord{IslandKey{island}, PhaseValue{ind, false}});
    }
    return out;
}

/// Reduce step for one key group: couple groups (exactly two parents)
/// produce two offspring with the offspring flag set and fitness absent;
/// passthrough groups are forwarded unchanged. A null crossover operator
/// forwards the parents.
inline void crossover_phase(const PhaseKey& key, std::span<const PhaseValue> values,
                            const OperatorSuite::CrossoverOperator& crossover, StreamRng& rng,
                            std::vector<PhaseRecord>& out) {
    if (std::holds_alternative<IslandKey>(key)) {
        for (const auto& v : values) out.push_back(PhaseRecord{key, v});
        return;
    }
    if (values.size() != 2)
        throw ContractError("couple group must contain exactly 2 parents, got " +
                            std::to_string(values.size()));
    if (!crossover) {
        for (const auto& v : values) out.push_back(PhaseRecord{key, v});
        return;
    }
    auto [first_child, second_child] =
        crossover(values[0].individual.genome, values[1].individual.genome, rng);
    out.push_back(
        PhaseRecord{key, PhaseValue{Individual{std::move(first_child), std::nullopt, false}, true}});
    out.push_back(PhaseRecord{
        key, PhaseValue{Individual{std::move(second_child), std::nullopt, false}, true}});
}

/// Applies the mutation operator to offspring records only; everything
/// else passes through unchanged. Mutated offspring keep fitness absent.
inline std::vector<PhaseRecord> mutation_phase(std::span<const PhaseRecord> records,
                                               const OperatorSuite::MutationOperator& mutate,
                                               StreamRng& rng) {
    std::vector<PhaseRecord> out(records.begin(), records.end());
    if (!mutate) return out;
    for (auto& rec : out) {
        if (!rec.value.offspring) continue;
        rec.value.individual.genome = mutate(rec.value.individual.genome, rng);
        rec.value.individual.fitness.reset();
        rec.value.individual.is_solution = false;
    }
    return out;
}

/// Builds the definitive island of size r from offspring and previous
/// population. With elitism on, the configured policy (default best-N)
/// decides; with elitism off the offspring are kept, padded with one
/// uniformly selected previous individual when the couple arithmetic left
/// the island one short (odd r).
inline std::vector<Individual> elitism_phase(std::span<const Individual> offspring,
                                             std::span<const Individual> previous,
                                             const OperatorSuite::ElitismPolicy& policy,
                                             bool elitism_enabled, std::uint32_t elite_count,
                                             std::size_t target_size, StreamRng& rng) {
    std::vector<Individual> definitive;
    if (elitism_enabled) {
        if (policy) {
            definitive = policy(previous, offspring, target_size, rng);
        } else {
            definitive = best_n_elitism(previous, offspring, elite_count, target_size);
        }
    } else {
        definitive.assign(offspring.begin(), offspring.end());
        if (definitive.size() > target_size) definitive.resize(target_size);
        while (definitive.size() < target_size) {
            if (previous.empty())
                throw ContractError("island fell short and no previous individuals are available");
            definitive.push_back(
                previous[static_cast<std::size_t>(rng.uniform_below(previous.size()))]);
        }
    }
    if (definitive.size() != target_size)
        throw ContractError("definitive island has " + std::to_string(definitive.size()) +
                            " individuals, expected " + std::to_string(target_size));
    return definitive;
}

struct GenerationResult {
    PopulationSnapshot snapshot;
    std::vector<TerminationFlag> flags;
};

/// Executes one generation as a chain job over the embedded executor and
/// reassembles the islands, in island order, into the next snapshot.
///
/// Once any island's check raises a flag, every later phase of this
/// generation forwards its input untouched, so the output population is
/// the post-check population. Pre-map stages therefore run with a barrier
/// between them: the set of flags visible after the check stage is the
/// same on every run, whatever the scheduling.
inline GenerationResult run_generation(const PopulationSnapshot& snapshot,
                                       const OperatorSuite& suite, const GaConfig& config,
                                       const FlagSink& flag_sink = {}) {
    config.validate();
    const std::uint64_t generation = snapshot.generation;
    const std::uint64_t output_generation = generation + 1;
    const std::uint32_t num_islands = config.islands;
    const std::size_t island_size = config.population_size;
    const std::size_t num_couples = island_size / 2;
    // The previous population must reach the reducer when elitism needs it
    // or when odd island sizes force padding from the previous population.
    const bool emit_previous = config.elitism_enabled || island_size % 2 == 1;
    const bool passthrough_chain = !suite.selection_operator;

    auto board = std::make_shared<FlagBoard>();

    mr::ChainPlan<PhaseKey, PhaseValue> plan;
    plan.num_partitions = num_islands;
    plan.partitioner = [](const PhaseKey& key, std::size_t num_partitions) {
        return static_cast<std::size_t>(key_island(key).value) % num_partitions;
    };

    plan.pre_maps.push_back(
        {std::string(phase_name::fitness),
         [&suite](std::size_t, std::span<const PhaseRecord> split, StreamRng&,
                  std::vector<PhaseRecord>& out) {
             out = fitness_phase(split, suite.fitness_evaluator);
         }});

    plan.pre_maps.push_back(
        {std::string(phase_name::termination_check),
         [&suite, board, &flag_sink, output_generation](std::size_t index,
                                                        std::span<const PhaseRecord> split,
                                                        StreamRng&,
                                                        std::vector<PhaseRecord>& out) {
             auto [records, flag] = termination_check_phase(
                 split, suite.termination_criterion,
                 IslandId{static_cast<std::uint32_t>(index)}, output_generation);
             out = std::move(records);
             if (flag) {
                 if (flag_sink) flag_sink(*flag);
                 board->raise(std::move(*flag));
             }
         }});

    plan.pre_maps.push_back(
        {std::string(phase_name::selection),
         [&suite, board, emit_previous, num_couples](std::size_t index,
                                                     std::span<const PhaseRecord> split,
                                                     StreamRng& rng,
                                                     std::vector<PhaseRecord>& out) {
             if (board->any()) {
                 out.assign(split.begin(), split.end());
                 return;
             }
             out = selection_phase(split, suite.selection_operator, emit_previous, num_couples,
                                   IslandId{static_cast<std::uint32_t>(index)}, rng);
         }});

    plan.reduce = {std::string(phase_name::crossover),
                   [&suite](const PhaseKey& key, std::span<const PhaseValue> values,
                            StreamRng& rng, std::vector<PhaseRecord>& out) {
                       crossover_phase(key, values, suite.crossover_operator, rng, out);
                   }};

    plan.post_maps.push_back(
        {std::string(phase_name::mutation),
         [&suite](std::size_t, std::span<const PhaseRecord> split, StreamRng& rng,
                  std::vector<PhaseRecord>& out) {
             out = mutation_phase(split, suite.mutation_operator, rng);
         }});

    plan.post_maps.push_back(
        {std::string(phase_name::elitism),
         [&suite, &config, board, island_size, passthrough_chain](
             std::size_t index, std::span<const PhaseRecord> split, StreamRng& rng,
             std::vector<PhaseRecord>& out) {
             if (board->any() || passthrough_chain) {
                 out.assign(split.begin(), split.end());
                 return;
             }
             std::vector<Individual> offspring;
             std::vector<Individual> previous;
             for (const auto& rec : split) {
                 if (rec.value.offspring)
                     offspring.push_back(rec.value.individual);
                 else
                     previous.push_back(rec.value.individual);
             }
             const auto definitive =
                 elitism_phase(offspring, previous, suite.elitism_policy,
                               config.elitism_enabled, config.elite_count, island_size, rng);
             const IslandKey key{IslandId{static_cast<std::uint32_t>(index)}};
             out.reserve(definitive.size());
             for (const auto& ind : definitive)
                 out.push_back(PhaseRecord{key, PhaseValue{ind, false}});
         }});

    auto splits = split_population(snapshot, num_islands);

    mr::SeedFactory seeds = [&config, generation](std::string_view stage, std::size_t index) {
        return phase_stream(config.master_seed, generation, stage,
                            config.island_seed_offset + index);
    };

    std::vector<std::vector<PhaseRecord>> partitions;
    try {
        partitions = mr::run_chain(plan, std::move(splits), seeds, config.threads);
    } catch (const PhaseError& e) {
        throw PhaseError(generation, e.phase(), e.split_index(), e.detail());
    }

    GenerationResult result;
    result.snapshot.generation = output_generation;
    result.snapshot.islands.resize(num_islands);
    const bool short_circuited = board->any() || passthrough_chain;
    for (std::uint32_t i = 0; i < num_islands; ++i) {
        auto& island = result.snapshot.islands[i];
        island.reserve(partitions[i].size());
        for (auto& rec : partitions[i]) island.push_back(std::move(rec.value.individual));
        if (!short_circuited && island.size() != island_size)
            throw PhaseError(generation, std::string(phase_name::elitism), i,
                             "island has " + std::to_string(island.size()) +
                                 " individuals, expected " + std::to_string(island_size));
    }
    result.flags = board->sorted_flags();
    return result;
}

} // namespace islandga

#endif // ISLANDGA_PIPELINE_HPP
