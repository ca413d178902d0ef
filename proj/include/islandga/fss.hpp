#ifndef ISLANDGA_FSS_HPP
#define ISLANDGA_FSS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "islandga/core.hpp"
#include "islandga/dataset.hpp"
#include "islandga/decision_tree.hpp"
#include "islandga/errors.hpp"
#include "islandga/operators.hpp"

/// The feature-subset-selection application: wrapper fitness over a
/// decision-tree classifier, an exhaustive-search oracle, and the complete
/// operator suite wiring the application into the framework.
namespace islandga::fss {

using TreeBuilderFn = std::function<DecisionTree(const Dataset&)>;

/// Wrapper fitness of an attribute mask: project the training data by the
/// mask, partition the instances positionally into `folds` contiguous
/// folds (earlier folds take the remainder), train on the other folds and
/// score on the held-out one, and return the best of the fold accuracies.
inline double best_fold_accuracy(const Dataset& train, const Genome& mask, std::size_t folds,
                                 const TreeBuilderFn& builder = {}) {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    const std::size_t n = train.size();
    if (folds > n) throw ConfigError("folds must not exceed the instance count");
    const Dataset projected = train.project(mask);

    std::vector<std::size_t> boundaries(folds + 1, 0);
    const std::size_t base = n / folds;
    const std::size_t remainder = n % folds;
    for (std::size_t f = 0; f < folds; ++f)
        boundaries[f + 1] = boundaries[f] + base + (f < remainder ? 1 : 0);

    double best = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::uint32_t> holdout_rows;
        std::vector<std::uint32_t> training_rows;
        holdout_rows.reserve(boundaries[f + 1] - boundaries[f]);
        training_rows.reserve(n - holdout_rows.capacity());
        for (std::uint32_t r = 0; r < n; ++r) {
            if (r >= boundaries[f] && r < boundaries[f + 1])
                holdout_rows.push_back(r);
            else
                training_rows.push_back(r);
        }
        const Dataset fold_train = projected.select_rows(training_rows);
        const Dataset fold_test = projected.select_rows(holdout_rows);
        const DecisionTree tree = builder ? builder(fold_train) : build_tree(fold_train);
        best = std::max(best, accuracy(tree, fold_test));
    }
    return best;
}

/// Ground truth by brute force: evaluates every one of the 2^m masks and
/// returns the best. Ties prefer fewer attributes, then the
/// lexicographically smaller mask. Refused above `max_attributes` — the
/// cost is exponential in m.
inline std::pair<Genome, double> exhaustive_best_subset(const Dataset& train, std::size_t folds,
                                                        std::size_t max_attributes = 12) {
    const std::size_t m = train.num_attributes();
    if (m > max_attributes)
        throw ConfigError("exhaustive search refused: " + std::to_string(m) +
                          " attributes exceed the limit of " + std::to_string(max_attributes));
    const std::uint64_t total = std::uint64_t{1} << m;
    std::optional<Genome> best_mask;
    double best_fitness = -1.0;
    std::size_t best_ones = 0;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
        std::vector<std::uint8_t> mask_bits(m);
        for (std::size_t i = 0; i < m; ++i) mask_bits[i] = (bits >> i) & 1u;
        Genome mask(std::move(mask_bits));
        const double fitness = best_fold_accuracy(train, mask, folds);
        const std::size_t ones = mask.count_ones();
        const bool better =
            !best_mask || fitness > best_fitness ||
            (fitness == best_fitness &&
             (ones < best_ones || (ones == best_ones && mask < *best_mask)));
        if (better) {
            best_mask = std::move(mask);
            best_fitness = fitness;
            best_ones = ones;
        }
    }
    return {std::move(*best_mask), best_fitness};
}

/// The full operator suite for the application: the fold-based wrapper
/// fitness as evaluator (memoized — identical masks are never re-scored),
/// roulette-wheel selection, single-point crossover, bit-flip mutation,
/// best-N elitism and, when a target accuracy is given, the inclusive
/// threshold criterion. Without a target the run goes to max generations.
inline OperatorSuite fss_operator_suite(Dataset train, std::size_t folds, const GaConfig& config,
                                        std::optional<double> accuracy_target = std::nullopt) {
    const std::size_t m = train.num_attributes();
    if (m < 1) throw ConfigError("dataset has no optional attributes to select");
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (folds > train.size()) throw ConfigError("folds must not exceed the instance count");

    struct EvaluationCache {
        std::mutex mutex;
        std::unordered_map<std::string, double> scores;
    };
    auto shared_train = std::make_shared<Dataset>(std::move(train));
    auto cache = std::make_shared<EvaluationCache>();

    OperatorSuite suite = make_binary_ga_suite(
        m, config,
        [shared_train, folds, cache](const Genome& mask) {
            const std::string key = mask.to_string();
            {
                std::lock_guard<std::mutex> lock(cache->mutex);
                if (auto it = cache->scores.find(key); it != cache->scores.end())
                    return it->second;
            }
            const double score = best_fold_accuracy(*shared_train, mask, folds);
            std::lock_guard<std::mutex> lock(cache->mutex);
            cache->scores.emplace(key, score);
            return score;
        },
        accuracy_target);
    return suite;
}

} // namespace islandga::fss

#endif // ISLANDGA_FSS_HPP
