#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "abmcal/strategies/common.hpp"

namespace abmcal {

// Number of negative-predicted slots in an epsilon-greedy batch.
inline int sa_negative_quota(double epsilon, int batch_size)
{
    return static_cast<int>(std::llround(epsilon * batch_size));
}

// Epsilon-greedy batch: classify a fresh candidate pool, then draw
// (1-epsilon) of the batch from the positive-predicted side and epsilon from
// the negative-predicted side, without replacement; a short side is topped up
// from the other.
inline std::vector<ParameterVector> sa_sampler_batch(
    const StrategyConfig& config, const SurrogateView& view,
    const std::function<ParameterVector()>& sampler, Rng& rng)
{
    if (!view.predict_label) throw std::invalid_argument("sa_sampler_batch: classifier required");

    std::vector<ParameterVector> positives, negatives;
    for (int s = 0; s < config.inner_samples; ++s) {
        ParameterVector cand = sampler();
        if (view.predict_label(cand) == Label::positive)
            positives.push_back(std::move(cand));
        else
            negatives.push_back(std::move(cand));
    }

    const auto draw = [&](std::vector<ParameterVector>& from, int want,
                          std::vector<ParameterVector>& into) {
        int taken = 0;
        while (taken < want && !from.empty()) {
            const std::size_t pick = static_cast<std::size_t>(
                uniform_int(rng, 0, static_cast<long long>(from.size()) - 1));
            into.push_back(std::move(from[pick]));
            from[pick] = std::move(from.back());
            from.pop_back();
            ++taken;
        }
        return taken;
    };

    const int want_neg = std::min(sa_negative_quota(config.epsilon, config.batch_size),
                                  config.batch_size);
    const int want_pos = config.batch_size - want_neg;

    std::vector<ParameterVector> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_size));
    const int got_pos = draw(positives, want_pos, batch);
    const int got_neg = draw(negatives, want_neg, batch);
    int missing = config.batch_size - got_pos - got_neg;
    missing -= draw(positives, missing, batch);
    missing -= draw(negatives, missing, batch);
    while (missing-- > 0) batch.push_back(sampler());
    return batch;
}

} // namespace abmcal
