#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "abmcal/sobol.hpp"
#include "abmcal/strategies/cmaes.hpp"
#include "abmcal/strategies/common.hpp"
#include "abmcal/strategies/dycors.hpp"
#include "abmcal/strategies/msrs.hpp"
#include "abmcal/strategies/sa_sampler.hpp"

namespace abmcal {

// Everything a proposal may draw on besides its own state: the box, the
// evaluated points, the shared quasi-random stream, and the run's RNG.
struct ProposalContext {
    const ParameterSpace& space;
    const std::vector<ParameterVector>& evaluated;
    SobolSequence* sobol = nullptr;
    long long abm_max_budget = 0;
};

inline std::function<ParameterVector()> plain_sampler(const StrategyConfig& config,
                                                      const ProposalContext& ctx, Rng& rng)
{
    if (uses_sobol_sampler(config.kind)) {
        if (ctx.sobol == nullptr)
            throw std::invalid_argument("propose_batch: sobol sequence required for this kind");
        return [&ctx]() { return sample_sobol(ctx.space, 1, *ctx.sobol).front(); };
    }
    return [&ctx, &rng]() { return sample_uniform(ctx.space, rng); };
}

// Assembles one full evaluation batch for the framework. Surrogate-guided
// kinds contribute their picks first and the plain sampler fills the rest;
// CMA-ES fills the whole batch itself.
inline std::vector<ParameterVector> propose_batch(const StrategyConfig& config,
                                                  StrategyState& state, const SurrogateView& view,
                                                  const ProposalContext& ctx, Rng& rng)
{
    config.validate();
    const auto sampler = plain_sampler(config, ctx, rng);
    const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

    std::vector<ParameterVector> batch;
    switch (config.kind) {
    case StrategyKind::random_baseline:
    case StrategyKind::sobol_baseline:
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(sampler());
        return batch;
    case StrategyKind::sa_random:
    case StrategyKind::sa_sobol:
        return sa_sampler_batch(config, view, sampler, rng);
    case StrategyKind::msrs:
        batch = msrs_iterations(config, state, view, ctx.space, ctx.evaluated, rng);
        break;
    case StrategyKind::dycors:
        batch = dycors_iterations(config, state, view, ctx.space, ctx.abm_max_budget, rng);
        break;
    case StrategyKind::cmaes:
        return cmaes_step(config, state, view, ctx.space, rng);
    }
    if (batch.size() > batch_size) batch.resize(batch_size);
    while (batch.size() < batch_size) batch.push_back(sampler());
    return batch;
}

} // namespace abmcal
