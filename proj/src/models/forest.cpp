#include "elevleak/models/forest.hpp"

#include "elevleak/errors.hpp"
#include "elevleak/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace elevleak::models {

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    int classes;
    std::size_t min_leaf;
    std::size_t features_per_split;
    Rng rng;
    DecisionTree tree;

    int build(std::vector<std::size_t>& indices) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
        for (std::size_t i : indices) ++counts[static_cast<std::size_t>(y[i])];
        const std::size_t total = indices.size();

        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || total <= min_leaf) return make_leaf(counts);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = gini(counts, total);

        // Sample features without replacement, in seeded order.
        const std::size_t dim = x[0].size();
        std::vector<std::size_t> candidates(dim);
        for (std::size_t j = 0; j < dim; ++j) candidates[j] = j;
        rng.shuffle(candidates);
        candidates.resize(std::min(features_per_split, dim));

        std::vector<std::pair<double, int>> column(total);
        for (std::size_t f : candidates) {
            for (std::size_t i = 0; i < total; ++i)
                column[i] = {x[indices[i]][f], y[indices[i]]};
            std::sort(column.begin(), column.end());

            std::vector<std::size_t> left_counts(static_cast<std::size_t>(classes), 0);
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < total; ++i) {
                ++left_counts[static_cast<std::size_t>(column[i].second)];
                ++n_left;
                if (column[i].first == column[i + 1].first) continue;

                std::vector<std::size_t> right_counts(counts);
                for (std::size_t c = 0; c < right_counts.size(); ++c)
                    right_counts[c] -= left_counts[c];
                const std::size_t n_right = total - n_left;
                const double weighted =
                    (static_cast<double>(n_left) * gini(left_counts, n_left) +
                     static_cast<double>(n_right) * gini(right_counts, n_right)) /
                    static_cast<double>(total);
                if (weighted + 1e-12 < best_impurity) {
                    best_impurity = weighted;
                    best_feature = static_cast<int>(f);
                    best_threshold = (column[i].first + column[i + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) return make_leaf(counts); // nothing improves impurity

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices) {
            if (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf(counts);

        const int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node)].threshold = best_threshold;
        const int left = build(left_idx);
        const int right = build(right_idx);
        tree.nodes[static_cast<std::size_t>(node)].left = left;
        tree.nodes[static_cast<std::size_t>(node)].right = right;
        return node;
    }

    int make_leaf(const std::vector<std::size_t>& counts) {
        const int node = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node)].class_counts = counts;
        return node;
    }
};

DecisionTree grow_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       int classes, const ForestConfig& config, Rng rng) {
    const std::size_t n = x.size();
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) bootstrap[i] = static_cast<std::size_t>(rng.below(n));

    const auto dim = x[0].size();
    TreeBuilder builder{x, y, classes, config.min_leaf,
                        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(
                                                     static_cast<double>(dim)))),
                        rng, {}};
    builder.build(bootstrap);
    return std::move(builder.tree);
}

} // namespace

int DecisionTree::predict(const std::vector<double>& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    const auto& counts = nodes[static_cast<std::size_t>(node)].class_counts;
    return static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin()); // tie -> smallest
}

std::vector<int> Forest::votes(const std::vector<double>& x) const {
    std::vector<int> out;
    out.reserve(trees.size());
    for (const auto& t : trees) out.push_back(t.predict(x));
    return out;
}

int Forest::predict(const std::vector<double>& x) const {
    std::vector<std::size_t> tally(static_cast<std::size_t>(classes), 0);
    for (const auto& t : trees) ++tally[static_cast<std::size_t>(t.predict(x))];
    return static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
}

Forest train_rfc(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                 const ForestConfig& config) {
    if (features.size() != labels.size()) throw LengthMismatch(features.size(), labels.size());
    if (features.empty()) throw SingleClassDataset();
    bool multi = false;
    int classes = 0;
    for (int yv : labels) {
        classes = std::max(classes, yv + 1);
        if (yv != labels.front()) multi = true;
    }
    if (!multi) throw SingleClassDataset();
    if (config.trees == 0) throw ValidationError("forest needs at least one tree");

    Forest forest;
    forest.classes = classes;
    forest.trees.resize(config.trees);

    const Rng base(config.seed);
    auto grow_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t)
            forest.trees[t] = grow_tree(features, labels, classes, config, base.fork(t));
    };

    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trees)));
    if (n_threads == 1) {
        grow_range(0, config.trees);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (config.trees + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(config.trees, lo + chunk);
            if (lo < hi) pool.emplace_back(grow_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return forest;
}

} // namespace elevleak::models
