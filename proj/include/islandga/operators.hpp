#ifndef ISLANDGA_OPERATORS_HPP
#define ISLANDGA_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/errors.hpp"
#include "islandga/rng.hpp"

/// The on-the-shelf behaviors: random initialiser, roulette-wheel
/// selection, single-point crossover, bit-flip mutation, best-N elitism and
/// a fitness-threshold termination criterion.
namespace islandga {

/// `count` genomes of `length` fair-coin genes, fitness unset.
inline std::vector<Individual> random_bit_initialiser(std::size_t length, std::size_t count,
                                                      StreamRng& rng) {
    if (length < 1) throw ContractError("genome length must be >= 1");
    if (count < 1) throw ContractError("individual count must be >= 1");
    std::vector<Individual> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::uint8_t> bits(length);
        for (auto& b : bits) b = rng.next_bit();
        out.push_back(Individual{Genome(std::move(bits)), std::nullopt, false});
    }
    return out;
}

/// Fitness-proportionate selection: each parent is an independent draw with
/// probability fitness_i / sum(fitness). A zero fitness total falls back to
/// uniform draws, since an all-zero population is still a valid one.
/// Self-mating is permitted (draws within a couple are independent).
inline std::vector<std::pair<std::size_t, std::size_t>> roulette_wheel_select(
    std::span<const Individual> individuals, std::size_t num_couples, StreamRng& rng) {
    std::vector<double> cumulative;
    cumulative.reserve(individuals.size());
    double total = 0.0;
    for (const auto& ind : individuals) {
        if (!ind.fitness) throw ContractError("roulette selection requires fitness values");
        if (*ind.fitness < 0.0 || std::isnan(*ind.fitness))
            throw ContractError("roulette selection requires non-negative fitness");
        total += *ind.fitness;
        cumulative.push_back(total);
    }
    auto draw = [&]() -> std::size_t {
        if (total <= 0.0) return static_cast<std::size_t>(rng.uniform_below(individuals.size()));
        const double u = rng.uniform_double() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto idx = static_cast<std::size_t>(it - cumulative.begin());
        return std::min(idx, individuals.size() - 1);
    };
    std::vector<std::pair<std::size_t, std::size_t>> couples;
    couples.reserve(num_couples);
    for (std::size_t c = 0; c < num_couples; ++c) {
        const std::size_t first = draw();
        const std::size_t second = draw();
        couples.emplace_back(first, second);
    }
    return couples;
}

/// Splits both parents at `point` (1 <= point <= m-1) and swaps the tails.
inline std::pair<Genome, Genome> crossover_at(const Genome& p1, const Genome& p2,
                                              std::size_t point) {
    if (p1.size() != p2.size()) throw ContractError("crossover requires equal genome lengths");
    const std::size_t m = p1.size();
    if (m < 2) throw ContractError("crossover requires genome length >= 2");
    if (point < 1 || point >= m) throw ContractError("crossover point out of range");
    std::vector<std::uint8_t> c1(p1.bits().begin(), p1.bits().begin() + point);
    c1.insert(c1.end(), p2.bits().begin() + point, p2.bits().end());
    std::vector<std::uint8_t> c2(p2.bits().begin(), p2.bits().begin() + point);
    c2.insert(c2.end(), p1.bits().begin() + point, p1.bits().end());
    return {Genome(std::move(c1)), Genome(std::move(c2))};
}

/// Draws the crossover point uniformly from {1, ..., m-1}; the endpoints
/// are excluded so both children mix genetic material.
inline std::pair<Genome, Genome> single_point_crossover(const Genome& p1, const Genome& p2,
                                                        StreamRng& rng) {
    if (p1.size() != p2.size()) throw ContractError("crossover requires equal genome lengths");
    if (p1.size() < 2) throw ContractError("crossover requires genome length >= 2");
    const std::size_t point = 1 + static_cast<std::size_t>(rng.uniform_below(p1.size() - 1));
    return crossover_at(p1, p2, point);
}

/// Flips each gene independently with probability `probability`.
inline Genome bit_flip_mutation(const Genome& genome, double probability, StreamRng& rng) {
    if (probability < 0.0 || probability > 1.0 || std::isnan(probability))
        throw ContractError("mutation probability must be in [0,1]");
    std::vector<std::uint8_t> bits = genome.bits();
    for (auto& b : bits) {
        if (rng.bernoulli(probability)) b ^= 1;
    }
    return Genome(std::move(bits));
}

/// Builds the definitive island of size r: the n best of the previous
/// population take the worst-ranked offspring slots (the tail of the
/// emission order, since offspring are not evaluated yet), the remaining
/// slots are filled by offspring in emission order. When the offspring
/// cannot fill their share (odd island sizes), the gap is covered by the
/// next-best previous individuals.
inline std::vector<Individual> best_n_elitism(std::span<const Individual> previous,
                                              std::span<const Individual> offspring,
                                              std::size_t n, std::size_t r) {
    if (n > r) throw ConfigError("elite_count must be <= population_size");
    const std::size_t keep = std::min(offspring.size(), r - n);
    std::size_t from_previous = r - keep;
    std::vector<Individual> out;
    out.reserve(r);
    out.insert(out.end(), offspring.begin(), offspring.begin() + keep);
    if (from_previous > 0) {
        if (previous.size() < from_previous)
            throw ContractError("previous population too small for elitism");
        std::vector<std::size_t> rank(previous.size());
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            return individual_precedes(previous[a], previous[b]);
        });
        for (std::size_t i = 0; i < from_previous; ++i) out.push_back(previous[rank[i]]);
    }
    return out;
}

/// True iff fitness >= threshold (inclusive). A +infinity threshold
/// disables the criterion.
inline bool fitness_threshold_criterion(const Individual& individual, double threshold) {
    if (!individual.fitness)
        throw ContractError("termination criterion requires an evaluated individual");
    return *individual.fitness >= threshold;
}

/// Number of one-genes; the classic benchmark fitness.
inline double onemax_fitness(const Genome& genome) {
    return static_cast<double>(genome.count_ones());
}

/// Assembles a complete suite for binary-genome problems from the built-in
/// operators: random initialiser, roulette wheel, single-point crossover,
/// bit-flip mutation, best-N elitism and an optional fitness target.
inline OperatorSuite make_binary_ga_suite(std::size_t genome_length, const GaConfig& config,
                                          OperatorSuite::FitnessEvaluator evaluator,
                                          std::optional<double> fitness_target = std::nullopt) {
    OperatorSuite suite;
    suite.initialiser = [genome_length](std::size_t count, StreamRng& rng) {
        return random_bit_initialiser(genome_length, count, rng);
    };
    suite.fitness_evaluator = std::move(evaluator);
    if (fitness_target)
        suite.termination_criterion = [target = *fitness_target](const Individual& ind) {
            return fitness_threshold_criterion(ind, target);
        };
    suite.selection_operator = [](std::span<const Individual> pop, std::size_t couples,
                                  StreamRng& rng) {
        return roulette_wheel_select(pop, couples, rng);
    };
    suite.crossover_operator = [](const Genome& a, const Genome& b, StreamRng& rng) {
        return single_point_crossover(a, b, rng);
    };
    suite.mutation_operator = [p = config.mutation_probability](const Genome& g, StreamRng& rng) {
        return bit_flip_mutation(g, p, rng);
    };
    suite.elitism_policy = [n = config.elite_count](std::span<const Individual> previous,
                                                    std::span<const Individual> offspring,
                                                    std::size_t target_size, StreamRng&) {
        return best_n_elitism(previous, offspring, n, target_size);
    };
    return suite;
}

/// The OneMax benchmark: maximize the number of ones; target defaults to
/// the genome length.
inline OperatorSuite make_onemax_suite(std::size_t genome_length, const GaConfig& config,
                                       std::optional<double> fitness_target = std::nullopt) {
    return make_binary_ga_suite(
        genome_length, config, [](const Genome& g) { return onemax_fitness(g); },
        fitness_target);
}

} // namespace islandga

#endif // ISLANDGA_OPERATORS_HPP
