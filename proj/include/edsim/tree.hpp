#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edsim/patient.hpp"
#include "edsim/rules.hpp"

namespace edsim {

struct TreeParams {
    int max_depth = 6;
    int min_leaf = 5;
    double min_gini_gain = 1e-6;
};

/// Class counts indexed by label: [0] not admitted, [1] admitted.
using ClassCounts = std::array<std::size_t, 2>;

inline double gini(const ClassCounts& c) {
    const double n = static_cast<double>(c[0] + c[1]);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(c[0]) / n, p1 = static_cast<double>(c[1]) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

/// Majority label; ties go to "not admitted".
inline bool majority(const ClassCounts& c) { return c[1] > c[0]; }

struct TreeNode {
    bool is_leaf = true;
    Feature feature = Feature::Age;
    double threshold = 0.0;       // numeric: left iff x < threshold
    std::uint32_t left_mask = 0;  // categorical: left iff category in mask
    int left = -1;
    int right = -1;
    ClassCounts counts{0, 0};
    bool prediction = false;
    int depth = 0;
};

inline bool goes_left(const TreeNode& n, const PatientRecord& r) {
    if (is_numeric(n.feature)) return numeric_value(r, n.feature) < n.threshold;
    return (n.left_mask >> category_index(r, n.feature)) & 1u;
}

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, std::vector<Feature> features)
        : nodes_(std::move(nodes)), features_(std::move(features)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<Feature>& features() const { return features_; }
    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](auto& n) { return n.is_leaf; }));
    }
    int depth() const {
        int d = 0;
        for (const auto& n : nodes_) d = std::max(d, n.depth);
        return d;
    }

    int leaf_index(const PatientRecord& r) const {
        if (nodes_.empty()) throw std::logic_error("DecisionTree: empty tree");
        int i = 0;
        while (!nodes_[i].is_leaf) i = goes_left(nodes_[i], r) ? nodes_[i].left : nodes_[i].right;
        return i;
    }

    bool predict(const PatientRecord& r) const { return nodes_[leaf_index(r)].prediction; }

private:
    std::vector<TreeNode> nodes_;
    std::vector<Feature> features_;
};

inline bool predict(const DecisionTree& tree, const PatientRecord& r) { return tree.predict(r); }

namespace detail {

struct SplitChoice {
    bool valid = false;
    double gain = 0.0;
    Feature feature = Feature::Age;
    double threshold = 0.0;
    std::uint32_t left_mask = 0;
};

inline ClassCounts count_labels(std::span<const PatientRecord> data, const std::vector<std::size_t>& idx) {
    ClassCounts c{0, 0};
    for (auto i : idx) ++c[data[i].admitted ? 1 : 0];
    return c;
}

inline double weighted_child_gini(const ClassCounts& l, const ClassCounts& r) {
    const double nl = static_cast<double>(l[0] + l[1]), nr = static_cast<double>(r[0] + r[1]);
    return (nl * gini(l) + nr * gini(r)) / (nl + nr);
}

// Gains within this tolerance are ties; the earlier candidate is kept.
inline constexpr double kGainTieTolerance = 1e-12;

inline void consider(SplitChoice& best, double gain, Feature f, double thr, std::uint32_t mask) {
    if (!best.valid || gain > best.gain + kGainTieTolerance) best = {true, gain, f, thr, mask};
}

inline void best_numeric_split(std::span<const PatientRecord> data, const std::vector<std::size_t>& idx,
                               Feature f, const ClassCounts& total, double parent_gini, std::size_t min_leaf,
                               SplitChoice& best) {
    std::vector<std::pair<double, bool>> vals;
    vals.reserve(idx.size());
    for (auto i : idx) vals.emplace_back(numeric_value(data[i], f), data[i].admitted);
    std::stable_sort(vals.begin(), vals.end(), [](auto& a, auto& b) { return a.first < b.first; });

    ClassCounts left{0, 0};
    const std::size_t n = vals.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[vals[i].second ? 1 : 0];
        if (!(vals[i].first < vals[i + 1].first)) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const ClassCounts right{total[0] - left[0], total[1] - left[1]};
        double thr = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
        if (!(vals[i].first < thr)) thr = vals[i + 1].first;
        consider(best, parent_gini - weighted_child_gini(left, right), f, thr, 0);
    }
}

inline void best_categorical_split(std::span<const PatientRecord> data, const std::vector<std::size_t>& idx,
                                   Feature f, const ClassCounts& total, double parent_gini, std::size_t min_leaf,
                                   SplitChoice& best) {
    const int k = category_count(f);
    std::vector<ClassCounts> per(k, ClassCounts{0, 0});
    for (auto i : idx) ++per[category_index(data[i], f)][data[i].admitted ? 1 : 0];
    std::vector<int> present;
    for (int c = 0; c < k; ++c)
        if (per[c][0] + per[c][1] > 0) present.push_back(c);
    const std::size_t p = present.size();
    if (p < 2) return;

    auto evaluate_mask = [&](std::uint32_t mask) {
        ClassCounts left{0, 0};
        for (int c : present)
            if ((mask >> c) & 1u) {
                left[0] += per[c][0];
                left[1] += per[c][1];
            }
        const ClassCounts right{total[0] - left[0], total[1] - left[1]};
        if (left[0] + left[1] < min_leaf || right[0] + right[1] < min_leaf) return;
        consider(best, parent_gini - weighted_child_gini(left, right), f, 0.0, mask);
    };

    if (p <= 8) {
        // Every subset of the present categories, with the last present one pinned right.
        for (std::uint32_t m = 1; m < (1u << (p - 1)); ++m) {
            std::uint32_t mask = 0;
            for (std::size_t j = 0; j + 1 < p; ++j)
                if ((m >> j) & 1u) mask |= 1u << present[j];
            evaluate_mask(mask);
        }
    } else {
        // Binary target: ordering categories by admit rate makes prefix splits sufficient.
        std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
            return per[a][1] * (per[b][0] + per[b][1]) < per[b][1] * (per[a][0] + per[a][1]);
        });
        std::uint32_t mask = 0;
        for (std::size_t j = 0; j + 1 < p; ++j) {
            mask |= 1u << present[j];
            evaluate_mask(mask);
        }
    }
}

inline int grow(std::span<const PatientRecord> data, const std::vector<std::size_t>& idx,
                const std::vector<Feature>& features, const TreeParams& params, int depth,
                std::vector<TreeNode>& nodes) {
    const int id = static_cast<int>(nodes.size());
    TreeNode node;
    node.counts = count_labels(data, idx);
    node.prediction = majority(node.counts);
    node.depth = depth;
    nodes.push_back(node);

    const double parent = gini(node.counts);
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params.min_leaf));
    if (depth >= params.max_depth || parent == 0.0 || idx.size() < 2 * min_leaf) return id;

    SplitChoice best;
    for (Feature f : features) {
        if (is_numeric(f))
            best_numeric_split(data, idx, f, node.counts, parent, min_leaf, best);
        else
            best_categorical_split(data, idx, f, node.counts, parent, min_leaf, best);
    }
    if (!best.valid || best.gain < params.min_gini_gain) return id;

    std::vector<std::size_t> left_idx, right_idx;
    TreeNode probe;
    probe.feature = best.feature;
    probe.threshold = best.threshold;
    probe.left_mask = best.left_mask;
    for (auto i : idx) (goes_left(probe, data[i]) ? left_idx : right_idx).push_back(i);

    nodes[id].is_leaf = false;
    nodes[id].feature = best.feature;
    nodes[id].threshold = best.threshold;
    nodes[id].left_mask = best.left_mask;
    const int l = grow(data, left_idx, features, params, depth + 1, nodes);
    const int r = grow(data, right_idx, features, params, depth + 1, nodes);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
}

}  // namespace detail

/// CART-style recursive partitioning with Gini impurity.
///
/// Numeric thresholds sit at midpoints of adjacent distinct values (left: x < t).
/// Categorical splits are searched over all subsets when at most 8 categories
/// are present in the node. Equal gains keep the earlier feature in the fixed
/// Feature order, then the smaller threshold (or smaller subset mask).
inline DecisionTree train_tree(std::span<const PatientRecord> train, std::vector<Feature> features,
                               const TreeParams& params = {}) {
    if (train.empty()) throw std::invalid_argument("train_tree: empty training set");
    if (features.empty()) throw std::invalid_argument("train_tree: empty feature set");
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<TreeNode> nodes;
    detail::grow(train, idx, features, params, 0, nodes);
    return DecisionTree(std::move(nodes), std::move(features));
}

namespace detail {

inline std::uint32_t all_categories(Feature f) { return (1u << category_count(f)) - 1u; }

inline Condition branch_condition(const TreeNode& n, bool left) {
    if (is_numeric(n.feature)) {
        if (left) return NumericCondition{n.feature, std::nullopt, Bound{n.threshold, false}};
        return NumericCondition{n.feature, Bound{n.threshold, true}, std::nullopt};
    }
    const std::uint32_t mask = left ? n.left_mask : (all_categories(n.feature) & ~n.left_mask);
    return CategoryCondition{n.feature, mask};
}

inline void collect_rules(const DecisionTree& tree, int id, Clause path, RuleSet& out) {
    const auto& n = tree.nodes()[id];
    if (n.is_leaf) {
        if (n.prediction) out.clauses.push_back(std::move(path));
        return;
    }
    Clause l = path;
    l.add(branch_condition(n, true));
    collect_rules(tree, n.left, std::move(l), out);
    path.add(branch_condition(n, false));
    collect_rules(tree, n.right, std::move(path), out);
}

inline void write_node(std::ostream& out, const DecisionTree& tree, int id, const std::string& label, int indent) {
    const auto& n = tree.nodes()[id];
    out << std::string(2 * indent, ' ') << label << "  n=" << n.counts[0] + n.counts[1] << " [no=" << n.counts[0]
        << " yes=" << n.counts[1] << "] -> " << (n.prediction ? "admit" : "no") << (n.is_leaf ? " *" : "") << '\n';
    if (n.is_leaf) return;
    write_node(out, tree, n.left, to_string(branch_condition(n, true)), indent + 1);
    write_node(out, tree, n.right, to_string(branch_condition(n, false)), indent + 1);
}

}  // namespace detail

/// One clause per admit leaf: the merged conjunction of its root-to-leaf path.
inline RuleSet extract_rules(const DecisionTree& tree) {
    RuleSet rs;
    if (!tree.nodes().empty()) detail::collect_rules(tree, 0, Clause{}, rs);
    return rs;
}

/// Indented text rendering, one split condition per line; leaves marked with '*'.
inline void write_tree(std::ostream& out, const DecisionTree& tree) {
    if (tree.nodes().empty()) {
        out << "(empty tree)\n";
        return;
    }
    out << "features:";
    for (auto f : tree.features()) out << ' ' << feature_name(f);
    out << '\n';
    detail::write_node(out, tree, 0, "root", 0);
}

inline std::string to_string(const DecisionTree& tree) {
    std::ostringstream ss;
    write_tree(ss, tree);
    return ss.str();
}

}  // namespace edsim
