#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmcal/ks.hpp"
#include "abmcal/param_space.hpp"
#include "abmcal/random.hpp"
#include "abmcal/surrogate/decision_tree.hpp"
#include "abmcal/surrogate/gradient_boosting.hpp"
#include "abmcal/surrogate/metrics.hpp"
#include "abmcal/surrogate/svm.hpp"

namespace abmcal {

enum class SurrogateFamily { decision_tree, gradient_boosted_trees, support_vector_machine };
enum class SurrogateMode { classifier, regressor };

inline std::string to_string(SurrogateFamily f)
{
    switch (f) {
    case SurrogateFamily::decision_tree: return "decision_tree";
    case SurrogateFamily::gradient_boosted_trees: return "gradient_boosted_trees";
    case SurrogateFamily::support_vector_machine: return "support_vector_machine";
    }
    return "?";
}

struct TrainingSet {
    std::vector<ParameterVector> inputs;
    std::vector<Label> labels;
    std::vector<double> targets;

    std::size_t size() const { return inputs.size(); }

    void validate() const
    {
        if (labels.size() != inputs.size() || targets.size() != inputs.size())
            throw std::invalid_argument("TrainingSet: field lengths differ");
        for (double t : targets)
            if (t < 0.0 || t > 1.0)
                throw std::invalid_argument("TrainingSet: target outside [0,1]");
    }

    TrainingSet subset(const std::vector<std::size_t>& rows) const
    {
        TrainingSet out;
        for (std::size_t r : rows) {
            out.inputs.push_back(inputs[r]);
            out.labels.push_back(labels[r]);
            out.targets.push_back(targets[r]);
        }
        return out;
    }
};

// One fitted approximator of the simulation objective. Classifier mode
// predicts the positive/negative label, regressor mode the KSTS value; inputs
// are range-normalised to the unit box before any model sees them.
class Surrogate {
public:
    Surrogate(SurrogateFamily family, SurrogateMode mode) : family_(family), mode_(mode) {}

    SurrogateFamily family() const { return family_; }
    SurrogateMode mode() const { return mode_; }
    bool fitted() const { return fitted_; }
    double validation_score() const { return validation_score_; }
    void set_validation_score(double s) { validation_score_ = s; }

    void fit(const TrainingSet& data, const ParameterSpace& space)
    {
        data.validate();
        space_ = space;
        const bool classify = mode_ == SurrogateMode::classifier;
        if (classify) {
            std::size_t pos = 0;
            for (Label l : data.labels)
                if (l == Label::positive) ++pos;
            if (pos == 0 || pos == data.size())
                throw std::invalid_argument("Surrogate: classifier needs both labels present");
        } else if (data.size() < 2) {
            throw std::invalid_argument("Surrogate: regressor needs at least 2 rows");
        }

        FeatureMatrix X;
        X.reserve(data.size());
        for (const auto& v : data.inputs) X.push_back(normalize(space_, v));
        std::vector<double> y(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            y[i] = classify ? (data.labels[i] == Label::positive ? 1.0 : 0.0) : data.targets[i];

        switch (family_) {
        case SurrogateFamily::decision_tree:
            tree_ = std::make_shared<DecisionTree>();
            tree_->fit(X, y, classify);
            break;
        case SurrogateFamily::gradient_boosted_trees:
            gbt_ = std::make_shared<GradientBoostedTrees>();
            gbt_->fit(X, y, classify);
            break;
        case SurrogateFamily::support_vector_machine:
            if (classify) {
                svc_ = std::make_shared<SvmClassifier>();
                svc_->fit(X, y);
            } else {
                svr_ = std::make_shared<SvmRegressor>();
                svr_->fit(X, y);
            }
            break;
        }
        fitted_ = true;
    }

    Label predict_label(const ParameterVector& v) const
    {
        if (mode_ != SurrogateMode::classifier)
            throw std::logic_error("Surrogate: predict_label requires classifier mode");
        require_fitted();
        const std::vector<double> x = normalize(space_, v);
        double score = 0.0;
        switch (family_) {
        case SurrogateFamily::decision_tree: score = tree_->predict(x); break;
        case SurrogateFamily::gradient_boosted_trees: score = gbt_->predict(x); break;
        case SurrogateFamily::support_vector_machine: score = svc_->predict(x); break;
        }
        return score >= 0.5 ? Label::positive : Label::negative;
    }

    double predict_value(const ParameterVector& v) const
    {
        if (mode_ != SurrogateMode::regressor)
            throw std::logic_error("Surrogate: predict_value requires regressor mode");
        require_fitted();
        const std::vector<double> x = normalize(space_, v);
        double value = 0.0;
        switch (family_) {
        case SurrogateFamily::decision_tree: value = tree_->predict(x); break;
        case SurrogateFamily::gradient_boosted_trees: value = gbt_->predict(x); break;
        case SurrogateFamily::support_vector_machine: value = svr_->predict(x); break;
        }
        return std::clamp(value, 0.0, 1.0);
    }

private:
    void require_fitted() const
    {
        if (!fitted_) throw std::logic_error("Surrogate: predictions only after fitting");
    }

    SurrogateFamily family_;
    SurrogateMode mode_;
    ParameterSpace space_;
    std::shared_ptr<DecisionTree> tree_;
    std::shared_ptr<GradientBoostedTrees> gbt_;
    std::shared_ptr<SvmClassifier> svc_;
    std::shared_ptr<SvmRegressor> svr_;
    double validation_score_ = 0.0;
    bool fitted_ = false;
};

namespace detail {

// Folds dealt round-robin after a seeded shuffle; classifier folds are dealt
// per label so every fold keeps the class mix.
inline std::vector<std::vector<std::size_t>> make_folds(const TrainingSet& data, SurrogateMode mode,
                                                        std::size_t k, std::uint64_t seed)
{
    std::vector<std::vector<std::size_t>> folds(k);
    Rng rng(seed);
    const auto deal = [&](std::vector<std::size_t>& rows) {
        for (std::size_t i = rows.size(); i > 1; --i)
            std::swap(rows[i - 1], rows[static_cast<std::size_t>(uniform_int(
                                       rng, 0, static_cast<long long>(i) - 1))]);
        for (std::size_t i = 0; i < rows.size(); ++i) folds[i % k].push_back(rows[i]);
    };
    if (mode == SurrogateMode::classifier) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < data.size(); ++i)
            (data.labels[i] == Label::positive ? pos : neg).push_back(i);
        deal(pos);
        deal(neg);
    } else {
        std::vector<std::size_t> all(data.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        deal(all);
    }
    return folds;
}

} // namespace detail

// Mean held-out F1 (classifier) or RMSE (regressor) over k stratified folds.
inline double cross_validate(SurrogateFamily family, SurrogateMode mode, const TrainingSet& data,
                             const ParameterSpace& space, std::size_t k = 3, std::uint64_t seed = 1)
{
    data.validate();
    if (k < 2 || data.size() < k)
        throw std::invalid_argument("cross_validate: need 2 <= k <= data size");
    if (mode == SurrogateMode::classifier) {
        bool has_pos = false, has_neg = false;
        for (Label l : data.labels) (l == Label::positive ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg)
            throw std::invalid_argument("cross_validate: classifier needs both labels present");
    }
    const auto folds = detail::make_folds(data, mode, k, seed);

    double total = 0.0;
    std::size_t scored = 0;
    for (std::size_t f = 0; f < k; ++f) {
        if (folds[f].empty()) continue;
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        const TrainingSet train = data.subset(train_rows);
        const TrainingSet held = data.subset(folds[f]);

        if (mode == SurrogateMode::classifier) {
            bool has_pos = false, has_neg = false;
            for (Label l : train.labels) (l == Label::positive ? has_pos : has_neg) = true;
            if (!has_pos || !has_neg) {
                // Degenerate training fold: score as constant-prediction F1.
                const Label constant =
                    !train.labels.empty() && train.labels[0] == Label::positive
                        ? Label::positive
                        : Label::negative;
                std::vector<Label> pred(held.size(), constant);
                total += f1_score(pred, held.labels);
                ++scored;
                continue;
            }
        }

        Surrogate s(family, mode);
        s.fit(train, space);
        if (mode == SurrogateMode::classifier) {
            std::vector<Label> pred;
            pred.reserve(held.size());
            for (const auto& v : held.inputs) pred.push_back(s.predict_label(v));
            total += f1_score(pred, held.labels);
        } else {
            std::vector<double> pred;
            pred.reserve(held.size());
            for (const auto& v : held.inputs) pred.push_back(s.predict_value(v));
            total += rmse(pred, held.targets);
        }
        ++scored;
    }
    if (scored == 0) throw std::invalid_argument("cross_validate: no scorable folds");
    return total / static_cast<double>(scored);
}

} // namespace abmcal
