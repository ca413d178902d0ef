#ifndef ISLANDGA_CORE_HPP
#define ISLANDGA_CORE_HPP

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "islandga/errors.hpp"
#include "islandga/rng.hpp"

namespace islandga {

/// Fixed-length string of binary genes. The framework's built-in operators
/// only ever produce 0/1 genes; the length is fixed for the lifetime of an
/// individual.
class Genome {
public:
    Genome() = default;

    explicit Genome(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (std::uint8_t b : bits_) {
            if (b > 1) throw ContractError("genome genes must be 0 or 1");
        }
    }

    static Genome zeros(std::size_t length) {
        return Genome(std::vector<std::uint8_t>(length, 0));
    }

    /// Parses a string like "0101".
    static Genome from_string(std::string_view s) {
        std::vector<std::uint8_t> bits;
        bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw ContractError("genome string must be 0/1 digits");
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        return Genome(std::move(bits));
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    std::uint8_t bit(std::size_t i) const { return bits_[i]; }
    void set_bit(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    std::size_t count_ones() const {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (std::uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
        return s;
    }

    friend bool operator==(const Genome&, const Genome&) = default;
    friend std::strong_ordering operator<=>(const Genome&, const Genome&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// The unit record flowing through every phase: a genome, the fitness value
/// once it has been evaluated, and the flag set when the individual
/// satisfied the termination criterion.
struct Individual {
    Genome genome;
    std::optional<double> fitness;
    bool is_solution = false;
};

/// Bit-exact equality: fitness values compare by IEEE-754 bit pattern so
/// that snapshots can be compared for exact reproducibility.
inline bool operator==(const Individual& a, const Individual& b) {
    if (a.genome != b.genome || a.is_solution != b.is_solution) return false;
    if (a.fitness.has_value() != b.fitness.has_value()) return false;
    if (!a.fitness) return true;
    return std::bit_cast<std::uint64_t>(*a.fitness) == std::bit_cast<std::uint64_t>(*b.fitness);
}

/// Total order used by elitism and reporting: higher fitness first, ties
/// broken by lexicographic genome order. Both individuals must have been
/// evaluated.
inline std::strong_ordering compare_individuals(const Individual& a, const Individual& b) {
    if (!a.fitness || !b.fitness)
        throw ContractError("compare_individuals requires fitness on both individuals");
    if (*a.fitness > *b.fitness) return std::strong_ordering::less;
    if (*a.fitness < *b.fitness) return std::strong_ordering::greater;
    return a.genome <=> b.genome;
}

/// True when `a` precedes `b` in the order above (i.e. `a` is better).
inline bool individual_precedes(const Individual& a, const Individual& b) {
    return compare_individuals(a, b) == std::strong_ordering::less;
}

/// The default behavior for any phase the user leaves unimplemented:
/// forward the input as output, unchanged.
template <typename RecordT>
RecordT default_behavior_passthrough(RecordT record) {
    return record;
}

struct IslandId {
    std::uint32_t value = 0;
    friend bool operator==(const IslandId&, const IslandId&) = default;
    friend std::strong_ordering operator<=>(const IslandId&, const IslandId&) = default;
};

/// The unit of persistence between generations: a generation index plus the
/// ordered island populations.
struct PopulationSnapshot {
    std::uint64_t generation = 0;
    std::vector<std::vector<Individual>> islands;

    std::size_t total_individuals() const {
        std::size_t n = 0;
        for (const auto& isl : islands) n += isl.size();
        return n;
    }

    friend bool operator==(const PopulationSnapshot& a, const PopulationSnapshot& b) {
        return a.generation == b.generation && a.islands == b.islands;
    }
};

/// Periodic exchange of individuals between islands. Destinations default
/// to a ring (island i sends to (i+1) mod J); migrants are selected
/// uniformly at random without replacement.
struct MigrationPolicyConfig {
    std::uint64_t frequency = 1;     // migrate every `frequency` generations
    std::uint32_t migrant_count = 0; // individuals leaving each island
    std::function<std::uint32_t(std::uint32_t island, std::uint32_t total_islands)> topology;

    std::uint32_t destination(std::uint32_t island, std::uint32_t total_islands) const {
        if (topology) return topology(island, total_islands) % total_islands;
        return (island + 1) % total_islands;
    }
};

struct GaConfig {
    std::uint32_t islands = 1;          // J
    std::uint32_t population_size = 2;  // r, per island
    std::uint64_t max_generations = 100;
    double mutation_probability = 0.01;
    bool elitism_enabled = false;
    std::uint32_t elite_count = 1;
    std::optional<MigrationPolicyConfig> migration;
    std::uint64_t master_seed = 0;

    /// Global index of this run's first island in the stream derivation.
    /// Lets a J=1 run reproduce exactly the random streams island k would
    /// see inside a larger run.
    std::uint32_t island_seed_offset = 0;

    /// Worker threads for the embedded executor; 0 picks the hardware
    /// parallelism.
    unsigned threads = 0;

    void validate() const {
        if (islands < 1) throw ConfigError("islands must be >= 1");
        if (population_size < 1) throw ConfigError("population_size must be >= 1");
        if (mutation_probability < 0.0 || mutation_probability > 1.0 ||
            std::isnan(mutation_probability))
            throw ConfigError("mutation_probability must be in [0,1]");
        if (elitism_enabled && elite_count > population_size)
            throw ConfigError("elite_count must be <= population_size");
        if (migration) {
            if (migration->frequency < 1)
                throw ConfigError("migration_frequency must be >= 1");
            if (migration->migrant_count > population_size)
                throw ConfigError("migration_count must be <= population_size");
        }
    }
};

/// The pluggable behaviors making up a GA. Any member left empty falls
/// back to the passthrough default for its phase. Implementations must be
/// deterministic given their random stream and safe to call concurrently
/// from multiple island tasks.
struct OperatorSuite {
    using Initialiser = std::function<std::vector<Individual>(std::size_t count, StreamRng&)>;
    using FitnessEvaluator = std::function<double(const Genome&)>;
    using TerminationCriterion = std::function<bool(const Individual&)>;
    /// Returns `num_couples` index pairs into the island population.
    using SelectionOperator = std::function<std::vector<std::pair<std::size_t, std::size_t>>(
        std::span<const Individual>, std::size_t num_couples, StreamRng&)>;
    using CrossoverOperator =
        std::function<std::pair<Genome, Genome>(const Genome&, const Genome&, StreamRng&)>;
    using MutationOperator = std::function<Genome(const Genome&, StreamRng&)>;
    /// Builds the definitive island of `target_size` from the previous
    /// population and the offspring.
    using ElitismPolicy = std::function<std::vector<Individual>(
        std::span<const Individual> previous, std::span<const Individual> offspring,
        std::size_t target_size, StreamRng&)>;

    Initialiser initialiser;
    FitnessEvaluator fitness_evaluator;
    TerminationCriterion termination_criterion;
    SelectionOperator selection_operator;
    CrossoverOperator crossover_operator;
    MutationOperator mutation_operator;
    ElitismPolicy elitism_policy;
};

/// Phase names; these feed the per-task random stream derivation, so they
/// are part of the reproducibility contract.
namespace phase_name {
inline constexpr std::string_view initialise = "initialise";
inline constexpr std::string_view fitness = "fitness";
inline constexpr std::string_view termination_check = "termination_check";
inline constexpr std::string_view selection = "selection";
inline constexpr std::string_view crossover = "crossover";
inline constexpr std::string_view mutation = "mutation";
inline constexpr std::string_view elitism = "elitism";
inline constexpr std::string_view migration = "migration";
} // namespace phase_name

/// Shortest round-trip decimal form of a double ("0.91" stays "0.91").
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

} // namespace islandga

#endif // ISLANDGA_CORE_HPP
