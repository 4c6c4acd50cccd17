#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmcal/framework.hpp"
#include "abmcal/serialization.hpp"

namespace abmcal {

constexpr std::uint64_t kTargetSeedSalt = 0x746172676574ULL;

struct SanityOutcome {
    RunResult result;
    double distance_to_truth = 0.0;
    double ksts = 1.0;
};

// Synthetic-truth check: simulate theta*, calibrate against that target, and
// report how close the recovered optimum is.
inline SanityOutcome sanity_check(const ParameterVector& theta_star, const FrameworkConfig& config,
                                  int jobs = 1,
                                  const ParameterSpace& full_space = default_space())
{
    if (!contains(full_space, theta_star))
        throw std::invalid_argument("sanity_check: theta* outside the parameter space");
    const std::uint64_t target_seed = mix_seed(config.seed, kTargetSeedSalt);
    const EpidemicSeries target = simulate(theta_star, config.simulation, target_seed);
    if (to_cdf(target).degenerate)
        throw std::invalid_argument("sanity_check: theta* produced a degenerate target series");

    SanityOutcome out;
    out.result = run_calibration(config, target, jobs);
    const ParameterVector optimal_full = config.embedding.active()
                                             ? config.embedding.embed(out.result.optimal)
                                             : out.result.optimal;
    out.distance_to_truth = standardized_l2(full_space, optimal_full, theta_star);
    out.ksts = out.result.optimal_ksts;
    return out;
}

inline double success_at(const std::vector<RunResult>& runs, double level)
{
    if (runs.empty()) throw std::invalid_argument("success_at: empty run list");
    if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("success_at: level outside (0,1)");
    const double threshold = 1.0 - level;
    std::size_t hits = 0;
    for (const RunResult& r : runs)
        if (r.optimal_ksts <= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(runs.size());
}

// Evaluations consumed when the best-so-far trace first crosses the
// threshold; empty when the run never gets there.
inline std::optional<long long> evaluations_to_threshold(const RunResult& run, double threshold)
{
    for (const auto& [evals, ksts] : run.best_ksts_trace)
        if (ksts <= threshold) return evals;
    return std::nullopt;
}

// Mean-evaluations ratio baseline/strategy at the given success level. 0 when
// the strategy never succeeds; empty when the baseline never does.
inline std::optional<double> speedup(const std::vector<RunResult>& strategy_runs,
                                     const std::vector<RunResult>& baseline_runs, double level)
{
    if (strategy_runs.empty() || baseline_runs.empty())
        throw std::invalid_argument("speedup: empty run list");
    const double threshold = 1.0 - level;
    const auto mean_evals = [&](const std::vector<RunResult>& runs) -> std::optional<double> {
        double total = 0.0;
        std::size_t count = 0;
        for (const RunResult& r : runs) {
            if (const auto evals = evaluations_to_threshold(r, threshold)) {
                total += static_cast<double>(*evals);
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return total / static_cast<double>(count);
    };
    const auto baseline_mean = mean_evals(baseline_runs);
    if (!baseline_mean) return std::nullopt;
    const auto strategy_mean = mean_evals(strategy_runs);
    if (!strategy_mean) return 0.0;
    return *baseline_mean / *strategy_mean;
}

struct ExperimentSpec {
    int n_repeats = 20;
    std::vector<std::size_t> dims_to_calibrate;
    std::vector<StrategyKind> strategies;
    std::vector<SurrogateFamily> surrogates;
    FrameworkConfig base_config;
    std::vector<double> success_levels = {0.98, 0.99};
    std::uint64_t seed = 0;

    void validate() const
    {
        if (n_repeats < 1) throw std::invalid_argument("ExperimentSpec: n_repeats < 1");
        if (strategies.empty() || surrogates.empty())
            throw std::invalid_argument("ExperimentSpec: empty strategy/surrogate grid");
        for (std::size_t d : dims_to_calibrate)
            if (d >= default_space().dimension())
                throw std::invalid_argument("ExperimentSpec: dimension index out of range");
    }
};

struct CellResult {
    StrategyKind strategy = StrategyKind::random_baseline;
    SurrogateFamily family = SurrogateFamily::decision_tree;
    std::vector<RunResult> runs;
    std::vector<double> distances;
    int failures = 0;
    double best_ksts = std::numeric_limits<double>::infinity();
    std::size_t best_repeat = 0;
    ParameterVector best_full_params;
    std::uint64_t best_eval_seed = 0;
};

struct BenchmarkReport {
    std::vector<double> success_levels;
    std::vector<CellResult> cells;
    std::vector<EpidemicSeries> targets;
    std::vector<ParameterVector> truths;
    FrameworkConfig base_config;

    const CellResult* baseline_cell() const
    {
        for (const CellResult& c : cells)
            if (c.strategy == StrategyKind::random_baseline && !c.runs.empty()) return &c;
        return nullptr;
    }
};

inline double mean_of(const std::vector<double>& v)
{
    if (v.empty()) throw std::invalid_argument("mean_of: empty");
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
}

inline double cell_mean_ksts(const CellResult& cell)
{
    std::vector<double> k;
    k.reserve(cell.runs.size());
    for (const RunResult& r : cell.runs) k.push_back(r.optimal_ksts);
    return mean_of(k);
}

// Runs the strategy x surrogate grid over shared per-repeat synthetic truths.
// Baseline kinds ignore the surrogate axis and appear once.
inline BenchmarkReport run_benchmark(const ExperimentSpec& spec, int jobs = 1)
{
    spec.validate();
    const ParameterSpace full_space = default_space();
    const bool reduced = !spec.dims_to_calibrate.empty() &&
                         spec.dims_to_calibrate.size() < full_space.dimension();

    ParameterSpace space = full_space;
    if (reduced) {
        space.specs.clear();
        for (std::size_t d : spec.dims_to_calibrate) space.specs.push_back(full_space.specs[d]);
    }

    BenchmarkReport report;
    report.success_levels = spec.success_levels;
    report.base_config = spec.base_config;

    // Shared truths and targets so every cell calibrates the same problems.
    for (int r = 0; r < spec.n_repeats; ++r) {
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(r)));
        ParameterVector theta;
        EpidemicSeries target;
        for (int attempt = 0; attempt < 100; ++attempt) {
            theta = sample_uniform(full_space, rng);
            target = simulate(theta, spec.base_config.simulation,
                              mix_seed(mix_seed(spec.seed, static_cast<std::uint64_t>(r)),
                                       kTargetSeedSalt));
            if (!to_cdf(target).degenerate) break;
        }
        report.truths.push_back(theta);
        report.targets.push_back(target);
    }

    std::size_t cell_index = 0;
    for (StrategyKind kind : spec.strategies) {
        const bool surrogate_free = kind == StrategyKind::random_baseline ||
                                    kind == StrategyKind::sobol_baseline;
        std::size_t families = surrogate_free ? 1 : spec.surrogates.size();
        for (std::size_t f = 0; f < families; ++f, ++cell_index) {
            CellResult cell;
            cell.strategy = kind;
            cell.family = spec.surrogates[f];
            for (int r = 0; r < spec.n_repeats; ++r) {
                FrameworkConfig config = spec.base_config;
                config.space = space;
                if (reduced)
                    config.embedding = ParameterEmbedding{report.truths[static_cast<std::size_t>(r)],
                                                          spec.dims_to_calibrate};
                config.strategy.kind = kind;
                config.surrogate_family = cell.family;
                config.seed = mix_seed(mix_seed(spec.seed, 0xce11ULL + cell_index),
                                       static_cast<std::uint64_t>(r));
                try {
                    Calibration calib(config, report.targets[static_cast<std::size_t>(r)], jobs);
                    RunResult result = calib.run();
                    const LabeledSample best_row = select_optimal(calib.database());
                    const ParameterVector full = config.embedding.active()
                                                     ? config.embedding.embed(result.optimal)
                                                     : result.optimal;
                    cell.distances.push_back(standardized_l2(
                        full_space, full, report.truths[static_cast<std::size_t>(r)]));
                    if (result.optimal_ksts < cell.best_ksts) {
                        cell.best_ksts = result.optimal_ksts;
                        cell.best_repeat = static_cast<std::size_t>(r);
                        cell.best_full_params = full;
                        cell.best_eval_seed = best_row.seed;
                    }
                    cell.runs.push_back(std::move(result));
                } catch (const std::exception&) {
                    ++cell.failures;
                }
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

// ---- report serialization ----

inline nlohmann::json to_json(const BenchmarkReport& report)
{
    const CellResult* baseline = report.baseline_cell();
    nlohmann::json cells = nlohmann::json::array();
    for (const CellResult& cell : report.cells) {
        nlohmann::json traces = nlohmann::json::array();
        for (const RunResult& r : cell.runs) traces.push_back(to_json(r));
        nlohmann::json entry{{"strategy", to_string(cell.strategy)},
                             {"surrogate", to_string(cell.family)},
                             {"failures", cell.failures},
                             {"runs", traces}};
        if (!cell.runs.empty()) {
            entry["mean_standardized_l2"] = mean_of(cell.distances);
            entry["mean_ksts"] = cell_mean_ksts(cell);
            nlohmann::json success = nlohmann::json::object();
            nlohmann::json gains = nlohmann::json::object();
            for (double level : report.success_levels) {
                const std::string key = format_double(level);
                success[key] = success_at(cell.runs, level);
                if (baseline != nullptr) {
                    const auto s = speedup(cell.runs, baseline->runs, level);
                    gains[key] = s ? nlohmann::json(*s) : nlohmann::json();
                }
            }
            entry["success"] = success;
            entry["speedup_vs_random_baseline"] = gains;
        }
        cells.push_back(std::move(entry));
    }
    return {{"success_levels", report.success_levels},
            {"n_repeats", report.targets.size()},
            {"cells", cells}};
}

// Two-column plot series for the cumulative fit figures.
inline std::string scaled_cumulative_csv(const EpidemicSeries& series)
{
    const CumulativeDistribution cdf = to_cdf(series);
    std::string out = "day,scaled_cumulative\n";
    for (std::size_t d = 0; d < cdf.values.size(); ++d)
        out += std::to_string(d) + "," + format_double(cdf.values[d]) + "\n";
    return out;
}

} // namespace abmcal
