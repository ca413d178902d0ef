#ifndef ISLANDGA_DECISION_TREE_HPP
#define ISLANDGA_DECISION_TREE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "islandga/dataset.hpp"
#include "islandga/errors.hpp"

/// Top-down gain-ratio tree induction and classification. Nominal
/// attributes split multiway (one branch per declared value), numeric
/// attributes split binary at the best midpoint between consecutive
/// distinct values. A node stops growing when it is pure, smaller than two
/// instances, or no attribute offers positive information gain; leaves
/// predict the majority class with ties resolved towards the class
/// earliest in declared order. No pruning and no missing-value handling.
namespace islandga::fss {

namespace detail {
class TreeBuilder;
}

class DecisionTree {
public:
    std::uint32_t classify(const Dataset& dataset, std::size_t row) const {
        std::size_t node = 0;
        for (;;) {
            const Node& n = nodes_[node];
            if (n.children.empty()) return n.leaf_class;
            if (n.numeric_split) {
                node = dataset.numeric_value(n.split_attribute, row) <= n.threshold
                           ? n.children[0]
                           : n.children[1];
            } else {
                node = n.children[dataset.nominal_value(n.split_attribute, row)];
            }
        }
    }

    std::size_t node_count() const { return nodes_.size(); }

    /// Shallow view of one node, for inspection and testing.
    struct NodeView {
        bool leaf = true;
        std::size_t attribute = 0;
        bool numeric = false;
        double threshold = 0.0;
        std::uint32_t leaf_class = 0;
        std::size_t child_count = 0;
    };

    NodeView root_view() const {
        const Node& n = nodes_.front();
        return NodeView{n.children.empty(), n.split_attribute, n.numeric_split,
                        n.threshold,        n.leaf_class,      n.children.size()};
    }

    bool schema_matches(const Dataset& dataset) const {
        return schema_.schema_matches(dataset);
    }

private:
    struct Node {
        std::size_t split_attribute = 0;
        bool numeric_split = false;
        double threshold = 0.0;
        std::uint32_t leaf_class = 0;
        std::vector<std::size_t> children; // empty = leaf
    };

    friend class detail::TreeBuilder;

    std::vector<Node> nodes_;
    Dataset schema_; // empty row set; only attribute metadata is used
};

namespace detail {

// Gains below this are treated as zero to keep floating-point dust from
// producing splits a zero-gain attribute would not justify.
inline constexpr double kMinGain = 1e-12;

inline double entropy(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    double gain_ratio = 0.0;
    std::size_t attribute = 0;
    bool numeric = false;
    double threshold = 0.0;
    bool found = false;
};

class TreeBuilder {
public:
    explicit TreeBuilder(const Dataset& train) : data_(train) {
        num_classes_ = std::max<std::size_t>(data_.class_attribute().values.size(), 1);
    }

    DecisionTree build() {
        DecisionTree tree;
        std::vector<std::uint32_t> rows(data_.size());
        std::iota(rows.begin(), rows.end(), 0u);
        build_node(tree, rows);
        tree.schema_ = data_.select_rows({});
        return tree;
    }

private:
    std::size_t build_node(DecisionTree& tree, const std::vector<std::uint32_t>& rows) {
        const std::size_t index = tree.nodes_.size();
        tree.nodes_.emplace_back();

        std::vector<std::size_t> counts(num_classes_, 0);
        for (auto r : rows) ++counts[data_.class_value(r)];
        const std::uint32_t majority = majority_class(counts);
        const bool pure = counts[majority] == rows.size();

        tree.nodes_[index].leaf_class = majority;
        if (rows.size() < 2 || pure) return index;

        const double node_entropy = entropy(counts, rows.size());
        const SplitChoice choice = best_split(rows, node_entropy);
        if (!choice.found) return index;

        if (choice.numeric) {
            std::vector<std::uint32_t> left;
            std::vector<std::uint32_t> right;
            for (auto r : rows) {
                if (data_.numeric_value(choice.attribute, r) <= choice.threshold)
                    left.push_back(r);
                else
                    right.push_back(r);
            }
            tree.nodes_[index].split_attribute = choice.attribute;
            tree.nodes_[index].numeric_split = true;
            tree.nodes_[index].threshold = choice.threshold;
            const std::size_t left_child = build_node(tree, left);
            const std::size_t right_child = build_node(tree, right);
            tree.nodes_[index].children = {left_child, right_child};
        } else {
            const auto& values = data_.attributes()[choice.attribute].values;
            std::vector<std::vector<std::uint32_t>> partitions(values.size());
            for (auto r : rows)
                partitions[data_.nominal_value(choice.attribute, r)].push_back(r);
            tree.nodes_[index].split_attribute = choice.attribute;
            tree.nodes_[index].numeric_split = false;
            std::vector<std::size_t> children;
            children.reserve(values.size());
            for (const auto& part : partitions) {
                if (part.empty()) {
                    // Unseen branch: predict this node's majority class.
                    const std::size_t leaf = tree.nodes_.size();
                    tree.nodes_.emplace_back();
                    tree.nodes_[leaf].leaf_class = majority;
                    children.push_back(leaf);
                } else {
                    children.push_back(build_node(tree, part));
                }
            }
            tree.nodes_[index].children = std::move(children);
        }
        return index;
    }

    std::uint32_t majority_class(std::span<const std::size_t> counts) const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < counts.size(); ++c)
            if (counts[c] > counts[best]) best = c;
        return static_cast<std::uint32_t>(best);
    }

    /// Scans attributes in index order and thresholds in ascending order,
    /// keeping the first candidate with the strictly highest gain ratio, so
    /// exact ties resolve to the earliest attribute / lowest threshold.
    SplitChoice best_split(const std::vector<std::uint32_t>& rows, double node_entropy) const {
        SplitChoice best;
        const auto n = static_cast<double>(rows.size());
        for (std::size_t a = 0; a < data_.num_attributes(); ++a) {
            if (data_.attributes()[a].numeric) {
                scan_numeric(a, rows, node_entropy, n, best);
            } else {
                scan_nominal(a, rows, node_entropy, n, best);
            }
        }
        return best;
    }

    void scan_nominal(std::size_t attribute, const std::vector<std::uint32_t>& rows,
                      double node_entropy, double n, SplitChoice& best) const {
        const std::size_t num_values = data_.attributes()[attribute].values.size();
        std::vector<std::vector<std::size_t>> value_counts(num_values,
                                                           std::vector<std::size_t>(num_classes_, 0));
        std::vector<std::size_t> value_totals(num_values, 0);
        for (auto r : rows) {
            const auto v = data_.nominal_value(attribute, r);
            ++value_counts[v][data_.class_value(r)];
            ++value_totals[v];
        }
        double children_entropy = 0.0;
        double split_info = 0.0;
        std::size_t nonempty = 0;
        for (std::size_t v = 0; v < num_values; ++v) {
            if (value_totals[v] == 0) continue;
            ++nonempty;
            const double frac = static_cast<double>(value_totals[v]) / n;
            children_entropy += frac * entropy(value_counts[v], value_totals[v]);
            split_info -= frac * std::log2(frac);
        }
        if (nonempty < 2) return; // no separation, gain is zero
        const double gain = node_entropy - children_entropy;
        if (gain <= kMinGain || split_info <= 0.0) return;
        const double ratio = gain / split_info;
        if (!best.found || ratio > best.gain_ratio) {
            best = SplitChoice{ratio, attribute, false, 0.0, true};
        }
    }

    void scan_numeric(std::size_t attribute, const std::vector<std::uint32_t>& rows,
                      double node_entropy, double n, SplitChoice& best) const {
        std::vector<std::pair<double, std::uint32_t>> ordered;
        ordered.reserve(rows.size());
        for (auto r : rows)
            ordered.emplace_back(data_.numeric_value(attribute, r), data_.class_value(r));
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });

        std::vector<std::size_t> left_counts(num_classes_, 0);
        std::vector<std::size_t> right_counts(num_classes_, 0);
        for (const auto& [value, cls] : ordered) ++right_counts[cls];

        for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
            ++left_counts[ordered[i].second];
            --right_counts[ordered[i].second];
            if (ordered[i].first == ordered[i + 1].first) continue;
            const double threshold = (ordered[i].first + ordered[i + 1].first) / 2.0;
            const auto left_total = i + 1;
            const auto right_total = ordered.size() - left_total;
            const double left_frac = static_cast<double>(left_total) / n;
            const double right_frac = static_cast<double>(right_total) / n;
            const double gain = node_entropy - left_frac * entropy(left_counts, left_total) -
                                right_frac * entropy(right_counts, right_total);
            if (gain <= kMinGain) continue;
            const double split_info =
                -left_frac * std::log2(left_frac) - right_frac * std::log2(right_frac);
            if (split_info <= 0.0) continue;
            const double ratio = gain / split_info;
            if (!best.found || ratio > best.gain_ratio) {
                best = SplitChoice{ratio, attribute, true, threshold, true};
            }
        }
    }

    const Dataset& data_;
    std::size_t num_classes_ = 1;
};

} // namespace detail

inline DecisionTree build_tree(const Dataset& train) {
    if (train.size() == 0) throw DataError("cannot build a tree from an empty training set");
    detail::TreeBuilder builder(train);
    return builder.build();
}

/// Fraction of instances whose predicted class equals the true class.
inline double accuracy(const DecisionTree& tree, const Dataset& dataset) {
    if (dataset.size() == 0) throw DataError("accuracy requires a non-empty dataset");
    if (!tree.schema_matches(dataset))
        throw DataError("dataset schema does not match the tree's training schema");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < dataset.size(); ++r)
        if (tree.classify(dataset, r) == dataset.class_value(r)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

} // namespace islandga::fss

#endif // ISLANDGA_DECISION_TREE_HPP
