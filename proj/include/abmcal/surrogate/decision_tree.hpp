#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace abmcal {

using FeatureMatrix = std::vector<std::vector<double>>;

struct TreeOptions {
    int max_depth = 8;
    int min_leaf = 5;
};

// CART: Gini impurity for 0/1 targets, variance for real targets. Leaves hold
// the positive fraction (classification) or the mean (regression).
class DecisionTree {
public:
    void fit(const FeatureMatrix& X, const std::vector<double>& y, bool classification,
             TreeOptions options = {})
    {
        if (X.size() != y.size() || X.empty())
            throw std::invalid_argument("DecisionTree: bad training data");
        nodes_.clear();
        classification_ = classification;
        options_ = options;
        std::vector<std::size_t> idx(X.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        build(X, y, idx, 0);
    }

    double predict(const std::vector<double>& x) const
    {
        if (nodes_.empty()) throw std::logic_error("DecisionTree: not fitted");
        std::size_t at = 0;
        while (nodes_[at].feature >= 0)
            at = x[static_cast<std::size_t>(nodes_[at].feature)] < nodes_[at].threshold
                     ? nodes_[at].left
                     : nodes_[at].right;
        return nodes_[at].value;
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        double value = 0.0;
    };

    // Mean impurity contribution of a block: Gini = 2p(1-p), variance via
    // sum/sumsq. Both returned as (weighted) totals so splits compare sums.
    double block_cost(double sum, double sumsq, double n) const
    {
        if (n <= 0.0) return 0.0;
        const double mean = sum / n;
        if (classification_) return 2.0 * n * mean * (1.0 - mean);
        return sumsq - n * mean * mean;
    }

    std::size_t build(const FeatureMatrix& X, const std::vector<double>& y,
                      std::vector<std::size_t>& idx, int depth)
    {
        const std::size_t id = nodes_.size();
        nodes_.push_back({});

        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i : idx) {
            sum += y[i];
            sumsq += y[i] * y[i];
        }
        const double n = static_cast<double>(idx.size());
        nodes_[id].value = sum / n;

        const bool pure = block_cost(sum, sumsq, n) < 1e-12;
        if (depth >= options_.max_depth || too_small(idx.size()) || pure) return id;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_cost = block_cost(sum, sumsq, n) - 1e-12;
        const std::size_t d = X[0].size();
        std::vector<std::size_t> order = idx;
        for (std::size_t f = 0; f < d; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X[a][f] < X[b][f];
            });
            double lsum = 0.0, lsumsq = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                const double yk = y[order[k]];
                lsum += yk;
                lsumsq += yk * yk;
                const std::size_t left_n = k + 1;
                if (left_n < static_cast<std::size_t>(options_.min_leaf)) continue;
                if (order.size() - left_n < static_cast<std::size_t>(options_.min_leaf)) break;
                const double lo = X[order[k]][f];
                const double hi = X[order[k + 1]][f];
                if (!(lo < hi)) continue;
                const double cost = block_cost(lsum, lsumsq, static_cast<double>(left_n)) +
                                    block_cost(sum - lsum, sumsq - lsumsq,
                                               static_cast<double>(order.size() - left_n));
                if (cost < best_cost) {
                    best_cost = cost;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (lo + hi);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (X[i][static_cast<std::size_t>(best_feature)] < best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        nodes_[id].feature = best_feature;
        nodes_[id].threshold = best_threshold;
        const std::size_t left = build(X, y, left_idx, depth + 1);
        const std::size_t right = build(X, y, right_idx, depth + 1);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    bool too_small(std::size_t n) const
    {
        return n < 2 * static_cast<std::size_t>(options_.min_leaf);
    }

    std::vector<Node> nodes_;
    TreeOptions options_;
    bool classification_ = false;
};

} // namespace abmcal
