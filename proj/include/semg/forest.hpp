#pragma once

// Random forest on plain feature vectors: bootstrap-sampled CART trees with
// Gini splits and a random feature subset per split.  Deterministic for a
// fixed seed — every tree derives its own stream from (seed, tree index).

#include <cstdint>
#include <vector>

namespace semg {

// One node of a binary decision tree.  Internal nodes route on
// x[feature] <= threshold (left) / > threshold (right); leaves carry the
// class histogram of the training samples that reached them.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  // child indices into DecisionTree::nodes
    int right = -1;
    std::vector<long long> histogram;  // leaves only
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    int num_classes = 0;
    int num_features = 0;
    int max_depth = 0;
    std::uint64_t seed = 0;
};

// Fits `num_trees` CART trees, each on a bootstrap resample, choosing at
// every split the best midpoint threshold over ceil(sqrt(F)) freshly drawn
// candidate features.  max_depth counts split levels (0 = histogram stump).
ForestModel forest_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       int num_trees, int max_depth, std::uint64_t seed);

// Majority vote over the trees' leaf-argmax predictions; all ties (within a
// leaf and across trees) break toward the lower class index.
int forest_predict_one(const ForestModel& model, const std::vector<double>& x);
std::vector<int> forest_predict(const ForestModel& model, const std::vector<std::vector<double>>& x);

} // namespace semg
