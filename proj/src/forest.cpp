#include "semg/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semg/rng.hpp"
#include "semg/tensor.hpp"

namespace semg {

namespace {

struct TreeBuilder {
    const std::vector<std::vector<double>>* x = nullptr;
    const std::vector<int>* y = nullptr;
    int num_classes = 0;
    int num_features = 0;
    int max_depth = 0;
    int features_per_split = 0;
    Rng* rng = nullptr;
    DecisionTree* tree = nullptr;

    std::vector<long long> class_counts(const std::vector<int>& ids) const {
        std::vector<long long> counts(static_cast<std::size_t>(num_classes), 0);
        for (int id : ids) ++counts[static_cast<std::size_t>((*y)[static_cast<std::size_t>(id)])];
        return counts;
    }

    static double gini(const std::vector<long long>& counts, long long total) {
        double g = 1.0;
        for (long long c : counts) {
            const double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    // Draws `features_per_split` distinct feature indices (partial
    // Fisher-Yates over 0..F-1), preserving the draw order.
    std::vector<int> draw_features() {
        std::vector<int> pool(static_cast<std::size_t>(num_features));
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<int> picked;
        picked.reserve(static_cast<std::size_t>(features_per_split));
        for (int i = 0; i < features_per_split; ++i) {
            const int j = i + rng->uniform_int(num_features - i);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            picked.push_back(pool[static_cast<std::size_t>(i)]);
        }
        return picked;
    }

    int make_leaf(const std::vector<int>& ids) {
        TreeNode node;
        node.histogram = class_counts(ids);
        tree->nodes.push_back(std::move(node));
        return static_cast<int>(tree->nodes.size()) - 1;
    }

    // Recursive CART construction, preorder, left before right — the node
    // order (and hence the whole model) is a pure function of the seed.
    int build(const std::vector<int>& ids, int depth) {
        const std::vector<long long> counts = class_counts(ids);
        const long long total = static_cast<long long>(ids.size());
        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](long long c) { return c > 0; }) <= 1;
        if (depth >= max_depth || pure || ids.size() < 2) return make_leaf(ids);

        const double node_gini = gini(counts, total);
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = node_gini;  // a split must strictly improve

        std::vector<std::pair<double, int>> vals;  // (value, label), sorted per feature
        std::vector<long long> left_counts(static_cast<std::size_t>(num_classes));
        for (int f : draw_features()) {
            vals.clear();
            vals.reserve(ids.size());
            for (int id : ids)
                vals.emplace_back((*x)[static_cast<std::size_t>(id)][static_cast<std::size_t>(f)],
                                  (*y)[static_cast<std::size_t>(id)]);
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::fill(left_counts.begin(), left_counts.end(), 0);
            long long n_left = 0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left_counts[static_cast<std::size_t>(vals[i].second)];
                ++n_left;
                if (vals[i].first == vals[i + 1].first) continue;  // midpoints exist only between distinct values

                const long long n_right = total - n_left;
                std::vector<long long> right_counts(counts);
                for (int c = 0; c < num_classes; ++c)
                    right_counts[static_cast<std::size_t>(c)] -= left_counts[static_cast<std::size_t>(c)];
                const double impurity =
                    (static_cast<double>(n_left) * gini(left_counts, n_left) +
                     static_cast<double>(n_right) * gini(right_counts, n_right)) /
                    static_cast<double>(total);
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf(ids);  // candidates were constant within the node

        std::vector<int> left_ids, right_ids;
        for (int id : ids) {
            const double v = (*x)[static_cast<std::size_t>(id)][static_cast<std::size_t>(best_feature)];
            (v <= best_threshold ? left_ids : right_ids).push_back(id);
        }

        tree->nodes.emplace_back();
        const int self = static_cast<int>(tree->nodes.size()) - 1;
        tree->nodes[static_cast<std::size_t>(self)].feature = best_feature;
        tree->nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
        const int l = build(left_ids, depth + 1);
        const int r = build(right_ids, depth + 1);
        tree->nodes[static_cast<std::size_t>(self)].left = l;
        tree->nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

int leaf_argmax(const std::vector<long long>& histogram) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(histogram.size()); ++c)
        if (histogram[static_cast<std::size_t>(c)] > histogram[static_cast<std::size_t>(best)]) best = c;
    return best;
}

} // namespace

ForestModel forest_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       int num_trees, int max_depth, std::uint64_t seed) {
    if (x.empty()) throw DataError("forest_fit: empty training set");
    if (x.size() != y.size())
        throw DataError("forest_fit: " + std::to_string(x.size()) + " feature rows but " +
                        std::to_string(y.size()) + " labels");
    if (num_trees < 1) throw std::invalid_argument("forest_fit: num_trees must be >= 1");
    if (max_depth < 0) throw std::invalid_argument("forest_fit: max_depth must be >= 0");

    const int n = static_cast<int>(x.size());
    const int f = static_cast<int>(x[0].size());
    if (f < 1) throw DataError("forest_fit: feature vectors are empty");
    int k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(x[i].size()) != f)
            throw DataError("forest_fit: inconsistent feature dimension at row " + std::to_string(i));
        if (y[i] < 0) throw DataError("forest_fit: negative label at row " + std::to_string(i));
        k = std::max(k, y[i] + 1);
    }

    ForestModel model;
    model.num_classes = k;
    model.num_features = f;
    model.max_depth = max_depth;
    model.seed = seed;
    model.trees.resize(static_cast<std::size_t>(num_trees));

    const int per_split = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(f))));
    for (int t = 0; t < num_trees; ++t) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> boot(static_cast<std::size_t>(n));
        for (int& id : boot) id = rng.uniform_int(n);

        TreeBuilder builder;
        builder.x = &x;
        builder.y = &y;
        builder.num_classes = k;
        builder.num_features = f;
        builder.max_depth = max_depth;
        builder.features_per_split = per_split;
        builder.rng = &rng;
        builder.tree = &model.trees[static_cast<std::size_t>(t)];
        builder.build(boot, 0);
    }
    return model;
}

int forest_predict_one(const ForestModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.num_features)
        throw DataError("forest_predict: feature vector has " + std::to_string(x.size()) +
                        " values, model expects " + std::to_string(model.num_features));
    std::vector<int> votes(static_cast<std::size_t>(model.num_classes), 0);
    for (const DecisionTree& tree : model.trees) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        ++votes[static_cast<std::size_t>(leaf_argmax(tree.nodes[static_cast<std::size_t>(node)].histogram))];
    }
    int best = 0;
    for (int c = 1; c < model.num_classes; ++c)
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return best;
}

std::vector<int> forest_predict(const ForestModel& model, const std::vector<std::vector<double>>& x) {
    std::vector<int> out;
    out.reserve(x.size());
    for (const std::vector<double>& row : x) out.push_back(forest_predict_one(model, row));
    return out;
}

} // namespace semg
