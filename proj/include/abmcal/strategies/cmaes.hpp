#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "abmcal/strategies/common.hpp"

namespace abmcal {

namespace detail {

inline Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m)
{
    const Eigen::Index n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

inline std::vector<std::vector<double>> from_eigen(const Eigen::MatrixXd& m)
{
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()),
                                         std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

} // namespace detail

inline void cmaes_init(StrategyState& state, std::size_t d)
{
    state.cma_mean.assign(d, 0.5);
    state.cma_cov.assign(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) state.cma_cov[i][i] = 1.0;
    state.cma_path_sigma.assign(d, 0.0);
    state.cma_step = 0.3;
    state.cma_ready = true;
}

// One generation in normalised coordinates: sample lambda = batch_size
// offspring, rank by the fitness callback (lower is better), recombine the
// top half with logarithmic weights, apply the rank-mu covariance update and
// cumulative step-size adaptation. Returns every offspring, best-ranked
// first, as the evaluation batch.
inline std::vector<ParameterVector> cmaes_step(const StrategyConfig& config, StrategyState& state,
                                               const SurrogateView& view,
                                               const ParameterSpace& space, Rng& rng)
{
    if (!view.predict_value) throw std::invalid_argument("cmaes_step: regressor required");
    const std::size_t d = space.dimension();
    if (!state.cma_ready || state.cma_mean.size() != d) cmaes_init(state, d);

    const int lambda = config.batch_size;
    const int mu = std::max(1, lambda / 2);

    std::vector<double> weights(static_cast<std::size_t>(mu));
    for (int i = 0; i < mu; ++i)
        weights[static_cast<std::size_t>(i)] =
            std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;
    double mu_eff = 0.0;
    for (double w : weights) mu_eff += w * w;
    mu_eff = 1.0 / mu_eff;

    const double dim = static_cast<double>(d);
    const double c_sigma = (mu_eff + 2.0) / (dim + mu_eff + 5.0);
    const double d_sigma =
        1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dim + 1.0)) - 1.0) + c_sigma;
    const double c_mu =
        std::min(0.99, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((dim + 2.0) * (dim + 2.0) + mu_eff));
    const double chi_n = std::sqrt(dim) * (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim * dim));

    Eigen::MatrixXd C = detail::to_eigen(state.cma_cov);
    C = 0.5 * (C + C.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0 ||
        !eig.eigenvalues().allFinite()) {
        cmaes_init(state, d);
        ++state.cma_reset_count;
        C = detail::to_eigen(state.cma_cov);
        eig.compute(C);
    }
    const Eigen::MatrixXd B = eig.eigenvectors();
    const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(1e-20);
    const Eigen::VectorXd D = evals.cwiseSqrt();

    Eigen::VectorXd mean(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) mean(static_cast<Eigen::Index>(i)) = state.cma_mean[i];
    const double sigma = state.cma_step;

    struct Offspring {
        Eigen::VectorXd x;
        ParameterVector params;
        double fitness;
    };
    std::vector<Offspring> pop;
    pop.reserve(static_cast<std::size_t>(lambda));
    for (int k = 0; k < lambda; ++k) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) z(static_cast<Eigen::Index>(i)) = normal(rng);
        Eigen::VectorXd x = mean + sigma * (B * D.asDiagonal() * z);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), 0.0, 1.0);
        ParameterVector params = clamp(space, denormalize(space, std::vector<double>(
                                                                      x.data(), x.data() + x.size())));
        const double fitness = view.predict_value(params);
        pop.push_back({std::move(x), std::move(params), fitness});
    }
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Offspring& a, const Offspring& b) { return a.fitness < b.fitness; });

    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (int i = 0; i < mu; ++i)
        new_mean += weights[static_cast<std::size_t>(i)] * pop[static_cast<std::size_t>(i)].x;

    // Rank-mu covariance update from the elite steps taken from the old mean.
    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                                    static_cast<Eigen::Index>(d));
    for (int i = 0; i < mu; ++i) {
        const Eigen::VectorXd y = (pop[static_cast<std::size_t>(i)].x - mean) / sigma;
        rank_mu += weights[static_cast<std::size_t>(i)] * (y * y.transpose());
    }
    C = (1.0 - c_mu) * C + c_mu * rank_mu;
    C = 0.5 * (C + C.transpose().eval());

    // Cumulative step-size adaptation along the whitened mean displacement.
    Eigen::VectorXd p_sigma(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        p_sigma(static_cast<Eigen::Index>(i)) = state.cma_path_sigma[i];
    const Eigen::MatrixXd c_inv_sqrt = B * D.cwiseInverse().asDiagonal() * B.transpose();
    p_sigma = (1.0 - c_sigma) * p_sigma +
              std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (c_inv_sqrt * (new_mean - mean)) /
                  sigma;
    double new_step = sigma * std::exp((c_sigma / d_sigma) * (p_sigma.norm() / chi_n - 1.0));
    new_step = std::clamp(new_step, 1e-12, 10.0);

    state.cma_cov = detail::from_eigen(C);
    for (std::size_t i = 0; i < d; ++i) {
        state.cma_mean[i] = new_mean(static_cast<Eigen::Index>(i));
        state.cma_path_sigma[i] = p_sigma(static_cast<Eigen::Index>(i));
    }
    state.cma_step = new_step;

    std::vector<ParameterVector> batch;
    batch.reserve(pop.size());
    for (const Offspring& o : pop) batch.push_back(o.params);
    return batch;
}

} // namespace abmcal
