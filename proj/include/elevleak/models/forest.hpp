#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace elevleak::models {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::size_t> class_counts; // leaf histogram, never all-zero
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    int predict(const std::vector<double>& x) const;
};

struct Forest {
    int classes = 0;
    std::vector<DecisionTree> trees;

    std::vector<int> votes(const std::vector<double>& x) const;
    // Majority vote over the trees; ties go to the smallest class index.
    int predict(const std::vector<double>& x) const;
};

struct ForestConfig {
    std::size_t trees = 100;
    std::uint64_t seed = 0;
    std::size_t min_leaf = 1;
    unsigned threads = 1;
};

// Bootstrap per tree, sqrt(d) feature subsampling per split, Gini impurity,
// grown to purity. Per-tree seeded generators keep the result identical for
// any thread count.
Forest train_rfc(const std::vector<std::vector<double>>& features,
                 const std::vector<int>& labels, const ForestConfig& config = {});

} // namespace elevleak::models
