#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmcal/ks.hpp"
#include "abmcal/param_space.hpp"
#include "abmcal/random.hpp"

namespace abmcal {

enum class StrategyKind {
    random_baseline,
    sobol_baseline,
    sa_random,
    sa_sobol,
    msrs,
    dycors,
    cmaes,
};

inline std::string to_string(StrategyKind k)
{
    switch (k) {
    case StrategyKind::random_baseline: return "random_baseline";
    case StrategyKind::sobol_baseline: return "sobol_baseline";
    case StrategyKind::sa_random: return "sa_random";
    case StrategyKind::sa_sobol: return "sa_sobol";
    case StrategyKind::msrs: return "msrs";
    case StrategyKind::dycors: return "dycors";
    case StrategyKind::cmaes: return "cmaes";
    }
    return "?";
}

inline StrategyKind strategy_kind_from_string(const std::string& name)
{
    for (StrategyKind k : {StrategyKind::random_baseline, StrategyKind::sobol_baseline,
                           StrategyKind::sa_random, StrategyKind::sa_sobol, StrategyKind::msrs,
                           StrategyKind::dycors, StrategyKind::cmaes})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown strategy kind: " + name);
}

inline bool uses_sobol_sampler(StrategyKind k)
{
    return k == StrategyKind::sobol_baseline || k == StrategyKind::sa_sobol;
}

inline bool needs_classifier(StrategyKind k)
{
    return k == StrategyKind::sa_random || k == StrategyKind::sa_sobol;
}

inline bool needs_regressor(StrategyKind k)
{
    return k == StrategyKind::msrs || k == StrategyKind::dycors || k == StrategyKind::cmaes;
}

struct StrategyConfig {
    StrategyKind kind = StrategyKind::random_baseline;
    int batch_size = 250;
    int inner_samples = 1000;
    int inner_iterations = 3;
    double epsilon = 0.10;
    std::vector<double> weight_cycle = {0.3, 0.5, 0.7, 0.95};
    double f1_threshold = 0.90;

    void validate() const
    {
        if (batch_size < 1 || inner_samples < 1 || inner_iterations < 1)
            throw std::invalid_argument("StrategyConfig: counts must be positive");
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("StrategyConfig: epsilon outside [0,1]");
        if (weight_cycle.empty()) throw std::invalid_argument("StrategyConfig: empty weight cycle");
        for (double w : weight_cycle)
            if (w < 0.0 || w > 1.0)
                throw std::invalid_argument("StrategyConfig: weight outside [0,1]");
    }
};

// Mutable per-run strategy bookkeeping. The CMA-ES block stays in plain
// vectors so the state is copyable without dragging matrix types along.
struct StrategyState {
    ParameterVector best_candidate;
    double best_ksts = std::numeric_limits<double>::infinity();
    std::vector<double> sigma;
    int success_count = 0;
    int failure_count = 0;
    long long evaluation_counter = 0;
    long long start_counter = 0;
    std::size_t weight_index = 0;

    std::vector<double> cma_mean;
    std::vector<std::vector<double>> cma_cov;
    std::vector<double> cma_path_sigma;
    double cma_step = 0.3;
    bool cma_ready = false;
    int cma_reset_count = 0;
};

// Read-only window onto whatever model (or oracle) scores candidates.
struct SurrogateView {
    std::function<double(const ParameterVector&)> predict_value;
    std::function<Label(const ParameterVector&)> predict_label;
};

// Minimum positive and negative sample count before an epsilon-greedy
// sampler may trust its classifier.
inline std::size_t sa_required_samples(std::size_t n_folds, std::size_t n_parameters)
{
    return n_folds + n_parameters + 1;
}

inline double merit(double s_scaled, double d_scaled, double w)
{
    return w * s_scaled + (1.0 - w) * (1.0 - d_scaled);
}

// Min-max rescale onto [0,1]; a constant vector maps to all zeros.
inline std::vector<double> minmax_scale(const std::vector<double>& values)
{
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-300) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
    return out;
}

inline double sigma_min_for(const ParameterSpec& spec) { return 0.005 * spec.range(); }
inline double sigma_max_for(const ParameterSpec& spec) { return 0.2 * spec.range(); }

inline void init_sigma(StrategyState& state, const ParameterSpace& space)
{
    state.sigma.resize(space.dimension());
    for (std::size_t i = 0; i < space.dimension(); ++i)
        state.sigma[i] = sigma_max_for(space.specs[i]);
    state.success_count = 0;
    state.failure_count = 0;
}

// Improvement-counter step-size control: three consecutive improving batches
// double sigma (capped), three consecutive non-improving ones halve it
// (floored).
inline void adapt_sigma(StrategyState& state, const ParameterSpace& space, bool improved)
{
    if (state.sigma.size() != space.dimension()) init_sigma(state, space);
    if (improved) {
        ++state.success_count;
        state.failure_count = 0;
        if (state.success_count >= 3) {
            for (std::size_t i = 0; i < state.sigma.size(); ++i)
                state.sigma[i] = std::min(state.sigma[i] * 2.0, sigma_max_for(space.specs[i]));
            state.success_count = 0;
        }
    } else {
        ++state.failure_count;
        state.success_count = 0;
        if (state.failure_count >= 3) {
            for (std::size_t i = 0; i < state.sigma.size(); ++i)
                state.sigma[i] = std::max(state.sigma[i] * 0.5, sigma_min_for(space.specs[i]));
            state.failure_count = 0;
        }
    }
}

namespace detail {

// Minimum standardised distance from v to the evaluated set; large sentinel
// when nothing has been evaluated yet.
inline double min_distance_to(const ParameterSpace& space, const ParameterVector& v,
                              const std::vector<ParameterVector>& evaluated)
{
    double best = std::numeric_limits<double>::max();
    for (const auto& e : evaluated) best = std::min(best, standardized_l2(space, v, e));
    return best;
}

} // namespace detail

} // namespace abmcal
