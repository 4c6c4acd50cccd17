#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abmcal/abm.hpp"
#include "abmcal/ks.hpp"
#include "abmcal/parallel.hpp"
#include "abmcal/param_space.hpp"
#include "abmcal/random.hpp"
#include "abmcal/sobol.hpp"
#include "abmcal/strategies/propose.hpp"
#include "abmcal/surrogate/surrogate.hpp"

namespace abmcal {

// Maps candidates from a reduced calibration space back into the full
// simulator parameter vector; inactive when every coordinate is calibrated.
struct ParameterEmbedding {
    ParameterVector base;
    std::vector<std::size_t> indices;

    bool active() const { return !indices.empty(); }

    ParameterVector embed(const ParameterVector& v) const
    {
        if (!active()) return v;
        if (v.size() != indices.size())
            throw std::invalid_argument("ParameterEmbedding: dimension mismatch");
        ParameterVector full = base;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= full.size())
                throw std::invalid_argument("ParameterEmbedding: index out of range");
            full[indices[i]] = v[i];
        }
        return full;
    }
};

struct FrameworkConfig {
    int abm_min_budget = 500;
    int abm_max_budget = 2500;
    int batch_size = 250;
    double ks_threshold = 0.005;
    double f1_threshold = 0.90;
    double rmse_threshold = 0.001;
    double alpha = 0.05;
    StrategyConfig strategy;
    SurrogateFamily surrogate_family = SurrogateFamily::gradient_boosted_trees;
    SimulationConfig simulation;
    std::uint64_t seed = 0;
    ParameterSpace space = default_space();
    ParameterEmbedding embedding;

    void validate() const
    {
        if (abm_min_budget < 1 || abm_max_budget < abm_min_budget)
            throw std::invalid_argument("FrameworkConfig: need 1 <= min_budget <= max_budget");
        if (batch_size < 1) throw std::invalid_argument("FrameworkConfig: batch_size < 1");
        if (ks_threshold <= 0.0 || f1_threshold <= 0.0 || rmse_threshold <= 0.0)
            throw std::invalid_argument("FrameworkConfig: thresholds must be positive");
        if (alpha <= 0.0 || alpha >= 1.0)
            throw std::invalid_argument("FrameworkConfig: alpha outside (0,1)");
        if (space.dimension() == 0) throw std::invalid_argument("FrameworkConfig: empty space");
        strategy.validate();
        simulation.validate();
        if (embedding.active() && embedding.indices.size() != space.dimension())
            throw std::invalid_argument("FrameworkConfig: embedding does not match space");
    }
};

struct LabeledSample {
    ParameterVector params;
    double ksts = 0.0;
    Label label = Label::negative;
    std::uint64_t seed = 0;
    long long iteration_index = 0;
};

class GroundTruthDB {
public:
    void append(LabeledSample sample)
    {
        if (sample.ksts < 0.0 || sample.ksts > 1.0)
            throw std::invalid_argument("GroundTruthDB: ksts outside [0,1]");
        if (sample.label == Label::positive)
            ++positives_;
        else
            ++negatives_;
        rows_.push_back(std::move(sample));
    }

    const std::vector<LabeledSample>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    std::size_t positives() const { return positives_; }
    std::size_t negatives() const { return negatives_; }

    std::size_t min_index() const
    {
        if (rows_.empty()) throw std::logic_error("GroundTruthDB: empty");
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows_.size(); ++i)
            if (rows_[i].ksts < rows_[best].ksts) best = i;
        return best;
    }

    TrainingSet training_set(std::size_t first = 0,
                             std::size_t count = std::numeric_limits<std::size_t>::max()) const
    {
        TrainingSet out;
        const std::size_t stop = count > rows_.size() - first ? rows_.size() : first + count;
        for (std::size_t i = first; i < stop; ++i) {
            out.inputs.push_back(rows_[i].params);
            out.labels.push_back(rows_[i].label);
            out.targets.push_back(rows_[i].ksts);
        }
        return out;
    }

    std::vector<ParameterVector> all_params() const
    {
        std::vector<ParameterVector> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.params);
        return out;
    }

private:
    std::vector<LabeledSample> rows_;
    std::size_t positives_ = 0;
    std::size_t negatives_ = 0;
};

enum class StopReason { threshold, budget };

inline std::string to_string(StopReason r)
{
    return r == StopReason::threshold ? "threshold" : "budget";
}

inline StopReason stop_reason_from_string(const std::string& s)
{
    if (s == "threshold") return StopReason::threshold;
    if (s == "budget") return StopReason::budget;
    throw std::invalid_argument("unknown stop reason: " + s);
}

struct RunResult {
    ParameterVector optimal;
    double optimal_ksts = 1.0;
    long long evaluations_used = 0;
    std::vector<std::pair<long long, double>> best_ksts_trace;
    StopReason stop_reason = StopReason::budget;
};

inline LabeledSample select_optimal(const GroundTruthDB& db)
{
    if (db.size() == 0) throw std::invalid_argument("select_optimal: empty database");
    return db.rows()[db.min_index()];
}

inline LabeledSample evaluate_candidate(const ParameterVector& params,
                                        const CumulativeDistribution& actual,
                                        const FrameworkConfig& config, std::uint64_t sim_seed)
{
    const ParameterVector full = config.embedding.active() ? config.embedding.embed(params) : params;
    const EpidemicSeries series = simulate(full, config.simulation, sim_seed);
    const CumulativeDistribution cdf = to_cdf(series);
    const double ksts = ks_statistic(cdf, actual);
    const double critical = critical_value(config.alpha, config.simulation.population);
    LabeledSample sample;
    sample.params = params;
    sample.ksts = ksts;
    sample.label = label_of(ksts, critical);
    sample.seed = sim_seed;
    return sample;
}

// Confidence-criteria owner: fits on demand, validates against the newest
// batch, exposes prediction callbacks. Injectable for instrumentation.
class SurrogateManager {
public:
    virtual ~SurrogateManager() = default;
    virtual bool fit(const TrainingSet& db) = 0;
    virtual bool ready() const = 0;
    virtual bool validate(const TrainingSet& newest_batch) = 0;
    virtual SurrogateView view() = 0;
    virtual double classifier_cv_f1() const { return 0.0; }
};

class RegressorManager : public SurrogateManager {
public:
    RegressorManager(SurrogateFamily family, ParameterSpace space, double rmse_threshold)
        : family_(family), space_(std::move(space)), rmse_threshold_(rmse_threshold)
    {
    }

    bool fit(const TrainingSet& db) override
    {
        if (db.size() < 2) return false;
        model_.emplace(family_, SurrogateMode::regressor);
        model_->fit(db, space_);
        ++fit_count_;
        return true;
    }

    bool ready() const override { return model_.has_value(); }

    bool validate(const TrainingSet& newest_batch) override
    {
        if (!model_ || newest_batch.size() == 0) return false;
        std::vector<double> pred;
        pred.reserve(newest_batch.size());
        for (const auto& v : newest_batch.inputs) pred.push_back(model_->predict_value(v));
        const double err = rmse(pred, newest_batch.targets);
        model_->set_validation_score(err);
        return err <= rmse_threshold_;
    }

    SurrogateView view() override
    {
        SurrogateView v;
        if (model_) {
            const Surrogate* m = &*model_;
            v.predict_value = [m](const ParameterVector& x) { return m->predict_value(x); };
        }
        return v;
    }

    int fit_count() const { return fit_count_; }

private:
    SurrogateFamily family_;
    ParameterSpace space_;
    double rmse_threshold_ = 0.001;
    std::optional<Surrogate> model_;
    int fit_count_ = 0;
};

// Classifier for the epsilon-greedy kinds: every fit cross-validates all
// three families and keeps the best by F1.
class ClassifierManager : public SurrogateManager {
public:
    ClassifierManager(ParameterSpace space, double f1_threshold, std::uint64_t seed)
        : space_(std::move(space)), f1_threshold_(f1_threshold), seed_(seed)
    {
    }

    bool fit(const TrainingSet& db) override
    {
        std::size_t pos = 0;
        for (Label l : db.labels)
            if (l == Label::positive) ++pos;
        if (db.size() < 3 || pos == 0 || pos == db.size()) return false;

        const std::uint64_t cv_seed = mix_seed(seed_, static_cast<std::uint64_t>(fit_count_));
        double best_f1 = -1.0;
        SurrogateFamily best_family = SurrogateFamily::decision_tree;
        for (SurrogateFamily family :
             {SurrogateFamily::decision_tree, SurrogateFamily::gradient_boosted_trees,
              SurrogateFamily::support_vector_machine}) {
            const double f1 =
                cross_validate(family, SurrogateMode::classifier, db, space_, 3, cv_seed);
            if (f1 > best_f1) {
                best_f1 = f1;
                best_family = family;
            }
        }
        model_.emplace(best_family, SurrogateMode::classifier);
        model_->fit(db, space_);
        model_->set_validation_score(best_f1);
        cv_f1_ = best_f1;
        ++fit_count_;
        return true;
    }

    bool ready() const override { return model_.has_value(); }

    bool validate(const TrainingSet& newest_batch) override
    {
        if (!model_ || newest_batch.size() == 0) return false;
        std::vector<Label> pred;
        pred.reserve(newest_batch.size());
        for (const auto& v : newest_batch.inputs) pred.push_back(model_->predict_label(v));
        return f1_score(pred, newest_batch.labels) >= f1_threshold_;
    }

    SurrogateView view() override
    {
        SurrogateView v;
        if (model_) {
            const Surrogate* m = &*model_;
            v.predict_label = [m](const ParameterVector& x) { return m->predict_label(x); };
        }
        return v;
    }

    double classifier_cv_f1() const override { return cv_f1_; }
    int fit_count() const { return fit_count_; }

private:
    ParameterSpace space_;
    double f1_threshold_ = 0.90;
    std::uint64_t seed_ = 0;
    std::optional<Surrogate> model_;
    double cv_f1_ = 0.0;
    int fit_count_ = 0;
};

struct RunDiagnostics {
    int fit_calls = 0;
    int validate_calls = 0;
    int validate_failures = 0;
    int fallback_batches = 0;
    long long iterations = 0;
};

// The calibration loop: exhaust the MIN budget with the base sampler, then
// alternate surrogate upkeep, strategy proposal, and ABM evaluation until the
// KS threshold or the MAX budget stops the run.
class Calibration {
public:
    Calibration(FrameworkConfig config, EpidemicSeries actual_series, int jobs = 1,
                std::shared_ptr<SurrogateManager> manager = nullptr)
        : config_(std::move(config)), actual_series_(std::move(actual_series)), jobs_(jobs),
          manager_(std::move(manager))
    {
        config_.validate();
        actual_cdf_ = to_cdf(actual_series_);
        if (actual_cdf_.degenerate)
            throw std::invalid_argument("Calibration: degenerate target series");
    }

    RunResult run()
    {
        StrategyConfig strat = config_.strategy;
        strat.batch_size = config_.batch_size;
        strat.validate();

        Rng rng(config_.seed);
        std::optional<SobolSequence> sobol;
        if (uses_sobol_sampler(strat.kind)) sobol.emplace(config_.space.dimension());

        if (manager_ == nullptr) {
            if (needs_regressor(strat.kind))
                manager_ = std::make_shared<RegressorManager>(config_.surrogate_family,
                                                              config_.space,
                                                              config_.rmse_threshold);
            else if (needs_classifier(strat.kind))
                manager_ = std::make_shared<ClassifierManager>(config_.space,
                                                               config_.f1_threshold,
                                                               config_.seed);
        }

        const auto base_draw = [&]() {
            if (sobol) return sample_sobol(config_.space, 1, *sobol).front();
            return sample_uniform(config_.space, rng);
        };

        GroundTruthDB db;
        RunResult result;
        double best = std::numeric_limits<double>::infinity();
        bool stopped = false;
        std::size_t newest_first = 0, newest_count = 0;

        const auto evaluate_batch = [&](const std::vector<ParameterVector>& batch) {
            newest_first = db.size();
            newest_count = batch.size();
            std::vector<LabeledSample> out(batch.size());
            const std::size_t base_index = db.size();
            parallel_for(batch.size(), jobs_, [&](std::size_t i) {
                const std::uint64_t sim_seed =
                    mix_seed(config_.seed, static_cast<std::uint64_t>(base_index + i));
                out[i] = evaluate_candidate(batch[i], actual_cdf_, config_, sim_seed);
            });
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i].iteration_index = diagnostics_.iterations;
                db.append(std::move(out[i]));
            }
            best = std::min(best, db.rows()[db.min_index()].ksts);
            result.best_ksts_trace.emplace_back(static_cast<long long>(db.size()), best);
            ++diagnostics_.iterations;
            if (best <= config_.ks_threshold) {
                stopped = true;
                result.stop_reason = StopReason::threshold;
            }
        };

        // Initialisation: exhaust the MIN budget with the plain sampler.
        while (!stopped && db.size() < static_cast<std::size_t>(config_.abm_min_budget)) {
            const std::size_t m =
                std::min<std::size_t>(static_cast<std::size_t>(config_.batch_size),
                                      static_cast<std::size_t>(config_.abm_min_budget) - db.size());
            std::vector<ParameterVector> batch;
            batch.reserve(m);
            for (std::size_t i = 0; i < m; ++i) batch.push_back(base_draw());
            evaluate_batch(batch);
        }

        StrategyState state;
        const std::size_t phi = sa_required_samples(3, config_.space.dimension());
        bool fit_attempted = false;

        while (!stopped && db.size() < static_cast<std::size_t>(config_.abm_max_budget)) {
            const std::size_t best_row = db.min_index();
            state.best_candidate = db.rows()[best_row].params;
            state.best_ksts = db.rows()[best_row].ksts;
            state.evaluation_counter = static_cast<long long>(db.size());
            if (!fit_attempted) state.start_counter = static_cast<long long>(db.size());

            if (manager_) {
                if (!manager_->ready()) {
                    manager_->fit(db.training_set());
                    ++diagnostics_.fit_calls;
                    fit_attempted = true;
                } else {
                    ++diagnostics_.validate_calls;
                    if (!manager_->validate(db.training_set(newest_first, newest_count))) {
                        ++diagnostics_.validate_failures;
                        manager_->fit(db.training_set());
                        ++diagnostics_.fit_calls;
                    }
                }
            }

            const std::size_t m =
                std::min<std::size_t>(static_cast<std::size_t>(config_.batch_size),
                                      static_cast<std::size_t>(config_.abm_max_budget) - db.size());
            StrategyConfig batch_config = strat;
            batch_config.batch_size = static_cast<int>(m);

            bool use_strategy = manager_ ? manager_->ready() : false;
            if (needs_classifier(strat.kind) && use_strategy) {
                use_strategy = manager_->classifier_cv_f1() >= strat.f1_threshold &&
                               db.positives() >= phi && db.negatives() >= phi;
            }
            if (strat.kind == StrategyKind::random_baseline ||
                strat.kind == StrategyKind::sobol_baseline)
                use_strategy = false;

            std::vector<ParameterVector> batch;
            if (use_strategy) {
                const std::vector<ParameterVector> evaluated = db.all_params();
                ProposalContext ctx{config_.space, evaluated, sobol ? &*sobol : nullptr,
                                    config_.abm_max_budget};
                batch = propose_batch(batch_config, state, manager_->view(), ctx, rng);
            } else {
                if (manager_ && needs_classifier(strat.kind) && manager_->ready())
                    ++diagnostics_.fallback_batches;
                batch.reserve(m);
                for (std::size_t i = 0; i < m; ++i) batch.push_back(base_draw());
            }

            const double before = best;
            evaluate_batch(batch);
            if (strat.kind == StrategyKind::msrs || strat.kind == StrategyKind::dycors)
                adapt_sigma(state, config_.space, best < before);
        }

        const LabeledSample optimal = select_optimal(db);
        result.optimal = optimal.params;
        result.optimal_ksts = optimal.ksts;
        result.evaluations_used = static_cast<long long>(db.size());
        if (!stopped) result.stop_reason = StopReason::budget;
        db_ = std::move(db);
        return result;
    }

    const GroundTruthDB& database() const { return db_; }
    const RunDiagnostics& diagnostics() const { return diagnostics_; }

private:
    FrameworkConfig config_;
    EpidemicSeries actual_series_;
    CumulativeDistribution actual_cdf_;
    int jobs_ = 1;
    std::shared_ptr<SurrogateManager> manager_;
    GroundTruthDB db_;
    RunDiagnostics diagnostics_;
};

inline RunResult run_calibration(const FrameworkConfig& config, const EpidemicSeries& actual,
                                 int jobs = 1,
                                 std::shared_ptr<SurrogateManager> manager = nullptr)
{
    Calibration c(config, actual, jobs, std::move(manager));
    return c.run();
}

} // namespace abmcal
