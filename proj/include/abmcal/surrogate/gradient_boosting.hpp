#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "abmcal/surrogate/decision_tree.hpp"

namespace abmcal {

struct GbtOptions {
    int rounds = 100;
    int max_depth = 4;
    double learning_rate = 0.1;
    double lambda = 1.0;
};

// Second-order boosted trees: each round fits a depth-limited tree to the
// gradient/hessian statistics of the current predictions, with leaf weight
// -G/(H+lambda). Split candidates come from per-feature presorted row orders
// computed once per fit.
class GradientBoostedTrees {
public:
    void fit(const FeatureMatrix& X, const std::vector<double>& y, bool classification,
             GbtOptions options = {})
    {
        if (X.size() != y.size() || X.empty())
            throw std::invalid_argument("GradientBoostedTrees: bad training data");
        options_ = options;
        classification_ = classification;
        trees_.clear();
        training_loss_.clear();

        const std::size_t n = X.size();
        const std::size_t d = X[0].size();

        std::vector<std::vector<std::size_t>> sorted(d, std::vector<std::size_t>(n));
        for (std::size_t f = 0; f < d; ++f) {
            std::iota(sorted[f].begin(), sorted[f].end(), std::size_t{0});
            std::stable_sort(sorted[f].begin(), sorted[f].end(),
                             [&](std::size_t a, std::size_t b) { return X[a][f] < X[b][f]; });
        }

        base_score_ = 0.0;
        if (!classification_) {
            for (double v : y) base_score_ += v;
            base_score_ /= static_cast<double>(n);
        }
        std::vector<double> score(n, base_score_);
        std::vector<double> grad(n), hess(n);

        for (int round = 0; round < options_.rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i) {
                if (classification_) {
                    const double p = sigmoid(score[i]);
                    grad[i] = p - y[i];
                    hess[i] = std::max(p * (1.0 - p), 1e-16);
                } else {
                    grad[i] = score[i] - y[i];
                    hess[i] = 1.0;
                }
            }
            const Tree tree = build_tree(X, sorted, grad, hess);
            trees_.push_back(tree);
            for (std::size_t i = 0; i < n; ++i)
                score[i] += options_.learning_rate * eval_tree(tree, X[i]);
            training_loss_.push_back(loss(score, y));
        }
    }

    double predict_raw(const std::vector<double>& x) const
    {
        double s = base_score_;
        for (const Tree& t : trees_) s += options_.learning_rate * eval_tree(t, x);
        return s;
    }

    // Classifier: probability of the positive class. Regressor: raw score.
    double predict(const std::vector<double>& x) const
    {
        if (trees_.empty()) throw std::logic_error("GradientBoostedTrees: not fitted");
        const double raw = predict_raw(x);
        return classification_ ? sigmoid(raw) : raw;
    }

    const std::vector<double>& training_loss() const { return training_loss_; }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double weight = 0.0;
    };
    using Tree = std::vector<Node>;

    static double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

    double loss(const std::vector<double>& score, const std::vector<double>& y) const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < score.size(); ++i) {
            if (classification_) {
                // log(1 + exp(-m)) with m = margin, stable for large |score|
                const double m = (y[i] > 0.5 ? 1.0 : -1.0) * score[i];
                total += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
            } else {
                const double r = score[i] - y[i];
                total += r * r;
            }
        }
        return total / static_cast<double>(score.size());
    }

    Tree build_tree(const FeatureMatrix& X, const std::vector<std::vector<std::size_t>>& sorted,
                    const std::vector<double>& grad, const std::vector<double>& hess) const
    {
        const std::size_t n = X.size();
        const std::size_t d = X[0].size();
        const double lambda = options_.lambda;

        Tree tree(1);
        std::vector<int> node_of(n, 0);
        std::vector<int> frontier{0};

        struct Split {
            double gain = 0.0;
            int feature = -1;
            double threshold = 0.0;
        };

        for (int depth = 0; depth < options_.max_depth && !frontier.empty(); ++depth) {
            const std::size_t width = frontier.size();
            std::vector<int> slot_of(tree.size(), -1);
            for (std::size_t s = 0; s < width; ++s) slot_of[frontier[s]] = static_cast<int>(s);

            std::vector<double> total_g(width, 0.0), total_h(width, 0.0);
            std::vector<std::size_t> total_n(width, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const int s = node_of[i] >= 0 ? slot_of[node_of[i]] : -1;
                if (s < 0) continue;
                total_g[s] += grad[i];
                total_h[s] += hess[i];
                ++total_n[s];
            }

            std::vector<Split> best(width);
            std::vector<double> run_g(width), run_h(width), last_value(width);
            std::vector<std::size_t> run_n(width);
            for (std::size_t f = 0; f < d; ++f) {
                std::fill(run_g.begin(), run_g.end(), 0.0);
                std::fill(run_h.begin(), run_h.end(), 0.0);
                std::fill(run_n.begin(), run_n.end(), std::size_t{0});
                std::fill(last_value.begin(), last_value.end(),
                          -std::numeric_limits<double>::infinity());
                for (std::size_t i : sorted[f]) {
                    const int s = node_of[i] >= 0 ? slot_of[node_of[i]] : -1;
                    if (s < 0) continue;
                    const double v = X[i][f];
                    if (run_n[s] > 0 && v > last_value[s]) {
                        const double gl = run_g[s], hl = run_h[s];
                        const double gr = total_g[s] - gl, hr = total_h[s] - hl;
                        const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                            total_g[s] * total_g[s] / (total_h[s] + lambda);
                        if (gain > best[s].gain + 1e-12) {
                            best[s].gain = gain;
                            best[s].feature = static_cast<int>(f);
                            best[s].threshold = 0.5 * (last_value[s] + v);
                        }
                    }
                    run_g[s] += grad[i];
                    run_h[s] += hess[i];
                    ++run_n[s];
                    last_value[s] = v;
                }
            }

            std::vector<int> next_frontier;
            for (std::size_t s = 0; s < width; ++s) {
                const int id = frontier[s];
                if (best[s].feature < 0 || best[s].gain <= 1e-12) {
                    tree[static_cast<std::size_t>(id)].weight =
                        -total_g[s] / (total_h[s] + lambda);
                    continue;
                }
                tree[static_cast<std::size_t>(id)].feature = best[s].feature;
                tree[static_cast<std::size_t>(id)].threshold = best[s].threshold;
                const int left = static_cast<int>(tree.size());
                tree.push_back({});
                const int right = static_cast<int>(tree.size());
                tree.push_back({});
                tree[static_cast<std::size_t>(id)].left = left;
                tree[static_cast<std::size_t>(id)].right = right;
                next_frontier.push_back(left);
                next_frontier.push_back(right);
            }

            for (std::size_t i = 0; i < n; ++i) {
                const int id = node_of[i];
                const int s = id >= 0 ? slot_of[id] : -1;
                if (s < 0) continue;
                const Node& nd = tree[static_cast<std::size_t>(id)];
                if (nd.feature < 0) {
                    node_of[i] = -1;
                    continue;
                }
                node_of[i] = X[i][static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left
                                                                                       : nd.right;
            }
            frontier = std::move(next_frontier);
        }

        // Nodes still on the frontier after the depth cap become leaves.
        if (!frontier.empty()) {
            std::vector<double> g(frontier.size(), 0.0), h(frontier.size(), 0.0);
            std::vector<int> slot_of(tree.size(), -1);
            for (std::size_t s = 0; s < frontier.size(); ++s)
                slot_of[frontier[s]] = static_cast<int>(s);
            for (std::size_t i = 0; i < n; ++i) {
                const int s = node_of[i] >= 0 ? slot_of[node_of[i]] : -1;
                if (s < 0) continue;
                g[static_cast<std::size_t>(s)] += grad[i];
                h[static_cast<std::size_t>(s)] += hess[i];
            }
            for (std::size_t s = 0; s < frontier.size(); ++s)
                tree[static_cast<std::size_t>(frontier[s])].weight =
                    -g[s] / (h[s] + options_.lambda);
        }
        return tree;
    }

    static double eval_tree(const Tree& tree, const std::vector<double>& x)
    {
        std::size_t at = 0;
        while (tree[at].feature >= 0)
            at = static_cast<std::size_t>(x[static_cast<std::size_t>(tree[at].feature)] <
                                                  tree[at].threshold
                                              ? tree[at].left
                                              : tree[at].right);
        return tree[at].weight;
    }

    std::vector<Tree> trees_;
    std::vector<double> training_loss_;
    GbtOptions options_;
    bool classification_ = false;
    double base_score_ = 0.0;
};

} // namespace abmcal
