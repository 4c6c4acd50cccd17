#pragma once

#include <stdexcept>
#include <vector>

#include "abmcal/strategies/common.hpp"

namespace abmcal {

// Metric stochastic response surface step: perturb the incumbent, score the
// pool by the weight-distance merit, keep the minimiser. One candidate per
// inner iteration; the weight cycle advances each time and persists in state.
inline std::vector<ParameterVector> msrs_iterations(const StrategyConfig& config,
                                                    StrategyState& state, const SurrogateView& view,
                                                    const ParameterSpace& space,
                                                    const std::vector<ParameterVector>& evaluated,
                                                    Rng& rng)
{
    if (!view.predict_value) throw std::invalid_argument("msrs_iterations: regressor required");
    if (state.best_candidate.size() != space.dimension())
        throw std::invalid_argument("msrs_iterations: no incumbent candidate");
    if (state.sigma.size() != space.dimension()) init_sigma(state, space);

    const std::vector<bool> full_mask(space.dimension(), true);
    std::vector<ParameterVector> selected;
    for (int it = 0; it < config.inner_iterations; ++it) {
        std::vector<ParameterVector> pool;
        pool.reserve(static_cast<std::size_t>(config.inner_samples));
        for (int s = 0; s < config.inner_samples; ++s)
            pool.push_back(perturb_gaussian(space, state.best_candidate, state.sigma, full_mask, rng));

        std::vector<double> predictions(pool.size());
        std::vector<double> distances(pool.size());
        for (std::size_t c = 0; c < pool.size(); ++c) {
            predictions[c] = view.predict_value(pool[c]);
            distances[c] = detail::min_distance_to(space, pool[c], evaluated);
        }
        const std::vector<double> s_scaled = minmax_scale(predictions);
        const std::vector<double> d_scaled = minmax_scale(distances);

        const double w = config.weight_cycle[state.weight_index % config.weight_cycle.size()];
        ++state.weight_index;

        std::size_t best = 0;
        double best_merit = std::numeric_limits<double>::max();
        for (std::size_t c = 0; c < pool.size(); ++c) {
            const double m = merit(s_scaled[c], d_scaled[c], w);
            if (m < best_merit) {
                best_merit = m;
                best = c;
            }
        }
        selected.push_back(pool[best]);
    }
    return selected;
}

} // namespace abmcal
