#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "abmcal/ks.hpp"

namespace abmcal {

inline double f1_score(const std::vector<Label>& predicted, const std::vector<Label>& truth)
{
    if (predicted.size() != truth.size())
        throw std::invalid_argument("f1_score: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == Label::positive;
        const bool t = truth[i] == Label::positive;
        if (p && t) ++tp;
        else if (p && !t) ++fp;
        else if (!p && t) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 0.0;
    return 2.0 * tp / denom;
}

inline double rmse(const std::vector<double>& predicted, const std::vector<double>& truth)
{
    if (predicted.size() != truth.size())
        throw std::invalid_argument("rmse: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("rmse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - truth[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predicted.size()));
}

} // namespace abmcal
