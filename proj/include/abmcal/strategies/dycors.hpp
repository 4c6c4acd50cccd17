#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "abmcal/strategies/common.hpp"

namespace abmcal {

// Probability that a coordinate joins the perturbation mask: starts at
// min(20/d, 1) and decays logarithmically over the remaining budget, never
// dropping below 1/d.
inline double dycors_perturbation_probability(long long n, long long n0, long long n_max,
                                              std::size_t d)
{
    if (d == 0) throw std::invalid_argument("dycors_perturbation_probability: d = 0");
    if (n < n0) throw std::invalid_argument("dycors_perturbation_probability: n < n0");
    if (n >= n_max) throw std::invalid_argument("dycors_perturbation_probability: n >= n_max");
    const double dim = static_cast<double>(d);
    const double num = std::log(static_cast<double>(n - n0 + 1));
    const double denom = std::log(static_cast<double>(n_max - n0));
    double frac;
    if (num == 0.0)
        frac = 1.0;
    else
        frac = denom > 0.0 ? 1.0 - num / denom : 0.0;
    const double p = std::min(20.0 / dim, 1.0) * frac;
    return std::clamp(p, 1.0 / dim, 1.0);
}

// Dynamic coordinate search step: masked Gaussian perturbations of the
// incumbent, pick the lowest predicted statistic. One candidate per inner
// iteration.
inline std::vector<ParameterVector> dycors_iterations(
    const StrategyConfig& config, StrategyState& state, const SurrogateView& view,
    const ParameterSpace& space, long long abm_max_budget, Rng& rng)
{
    if (!view.predict_value) throw std::invalid_argument("dycors_iterations: regressor required");
    if (state.best_candidate.size() != space.dimension())
        throw std::invalid_argument("dycors_iterations: no incumbent candidate");
    if (state.sigma.size() != space.dimension()) init_sigma(state, space);

    const std::size_t d = space.dimension();
    const long long n = std::min(state.evaluation_counter, abm_max_budget - 1);
    const double p =
        dycors_perturbation_probability(n, state.start_counter, abm_max_budget, d);

    std::vector<ParameterVector> selected;
    std::vector<bool> mask(d);
    for (int it = 0; it < config.inner_iterations; ++it) {
        ParameterVector best_candidate;
        double best_pred = std::numeric_limits<double>::max();
        for (int s = 0; s < config.inner_samples; ++s) {
            bool any = false;
            for (std::size_t i = 0; i < d; ++i) {
                mask[i] = uniform01(rng) < p;
                any = any || mask[i];
            }
            if (!any) mask[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long long>(d) - 1))] = true;
            ParameterVector cand = perturb_gaussian(space, state.best_candidate, state.sigma, mask, rng);
            const double pred = view.predict_value(cand);
            if (pred < best_pred) {
                best_pred = pred;
                best_candidate = std::move(cand);
            }
        }
        selected.push_back(std::move(best_candidate));
    }
    return selected;
}

} // namespace abmcal
