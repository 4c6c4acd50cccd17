#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include "abmcal/harness.hpp"
#include "abmcal/ingest.hpp"

using namespace abmcal;

namespace {

std::string data_dir()
{
    const char* dir = std::getenv("ABMCAL_DATA_DIR");
    REQUIRE(dir != nullptr);
    return dir;
}

std::string cli_path()
{
    const char* path = std::getenv("ABMCAL_CLI");
    REQUIRE(path != nullptr);
    return path;
}

void report(int criterion, bool pass, const std::string& detail)
{
    std::printf("criterion %d: %s - %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

int run_cli(const std::string& args)
{
    const std::string cmd = "\"" + cli_path() + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

// High-churn regime: half the population seeded, short infection period, full
// reinfection. Thousands of infection events keep replicate-to-replicate
// variation of the scaled cumulative curve small enough to resolve fine fits.
ParameterVector churn_truth()
{
    return clamp(default_space(), {0.9, 1.0, 0.0, 5.0, 41.0, 0.8, 0.022});
}

SimulationConfig churn_simulation()
{
    SimulationConfig sim;
    sim.population = 500;
    sim.initial_infected = 250;
    sim.days = 41;
    return sim;
}

} // namespace

TEST_CASE("formula oracles agree with brute-force reimplementations", "[criterion1]")
{
    Rng rng(20260822);
    const ParameterSpace space = default_space();
    double worst = 0.0;
    const auto record = [&](double impl, long double oracle) {
        worst = std::max(worst, std::abs(impl - static_cast<double>(oracle)));
    };

    for (int trial = 0; trial < 1000; ++trial) {
        // merit
        {
            const double s = uniform01(rng), d = uniform01(rng), w = uniform01(rng);
            record(merit(s, d, w),
                   (long double)w * s + (1.0L - (long double)w) * (1.0L - (long double)d));
        }
        // rmse
        {
            const std::size_t n = 1 + static_cast<std::size_t>(uniform_int(rng, 0, 19));
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = uniform01(rng);
                b[i] = uniform01(rng);
            }
            long double sum = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                const long double d = (long double)a[i] - (long double)b[i];
                sum += d * d;
            }
            record(rmse(a, b), sqrtl(sum / (long double)n));
        }
        // f1
        {
            const std::size_t n = 1 + static_cast<std::size_t>(uniform_int(rng, 0, 49));
            std::vector<Label> pred(n), truth(n);
            for (std::size_t i = 0; i < n; ++i) {
                pred[i] = uniform01(rng) < 0.5 ? Label::positive : Label::negative;
                truth[i] = uniform01(rng) < 0.5 ? Label::positive : Label::negative;
            }
            long double tp = 0.0L, fp = 0.0L, fn = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                const bool p = pred[i] == Label::positive;
                const bool t = truth[i] == Label::positive;
                if (p && t) tp += 1.0L;
                if (p && !t) fp += 1.0L;
                if (!p && t) fn += 1.0L;
            }
            const long double denom = 2.0L * tp + fp + fn;
            record(f1_score(pred, truth), denom == 0.0L ? 0.0L : 2.0L * tp / denom);
        }
        // standardized_l2
        {
            const ParameterVector a = sample_uniform(space, rng);
            const ParameterVector b = sample_uniform(space, rng);
            long double sum = 0.0L;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const long double scaled =
                    ((long double)a[i] - (long double)b[i]) /
                    (long double)(space.specs[i].upper - space.specs[i].lower);
                sum += scaled * scaled;
            }
            record(standardized_l2(space, a, b), sqrtl(sum));
        }
        // ks_statistic
        {
            const std::size_t n = 2 + static_cast<std::size_t>(uniform_int(rng, 0, 38));
            EpidemicSeries x(n), y(n);
            const bool zero_x = uniform01(rng) < 0.1;
            const bool zero_y = uniform01(rng) < 0.1;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = zero_x ? 0 : static_cast<int>(uniform_int(rng, 0, 30));
                y[i] = zero_y ? 0 : static_cast<int>(uniform_int(rng, 0, 30));
            }
            long double tx = 0.0L, ty = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                tx += x[i];
                ty += y[i];
            }
            long double oracle;
            if ((tx <= 0.0L) != (ty <= 0.0L)) {
                oracle = 1.0L;
            } else if (tx <= 0.0L) {
                oracle = 0.0L;
            } else {
                oracle = 0.0L;
                long double cx = 0.0L, cy = 0.0L;
                for (std::size_t i = 0; i < n; ++i) {
                    cx += x[i];
                    cy += y[i];
                    oracle = std::max(oracle, fabsl(cx / tx - cy / ty));
                }
            }
            record(ks_statistic(to_cdf(x), to_cdf(y)), oracle);
        }
        // critical_value
        {
            const double alpha = 0.001 + 0.998 * uniform01(rng);
            const long n = 1 + uniform_int(rng, 0, 9999);
            const long double coeff = sqrtl(-logl((long double)alpha) / 2.0L);
            record(critical_value(alpha, n),
                   coeff * sqrtl(2.0L * (long double)n / ((long double)n * (long double)n)));
        }
    }

    const double coeff_gap = std::abs(ks_critical_coefficient(0.05) - 1.2239);
    const bool pass = worst <= 1e-12 && coeff_gap <= 1e-4;
    report(1, pass,
           "formula implementations match independent oracles on 1000 random inputs "
           "(worst gap " +
               format_double(worst) + ", c(0.05) off by " + format_double(coeff_gap) + ")");
    CHECK(worst <= 1e-12);
    CHECK(coeff_gap <= 1e-4);
}

namespace {

double star_discrepancy_2d(const std::vector<std::vector<double>>& points, int m)
{
    double worst = 0.0;
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const double a = static_cast<double>(i) / m;
            const double b = static_cast<double>(j) / m;
            int inside = 0;
            for (const auto& p : points)
                if (p[0] < a && p[1] < b) ++inside;
            worst = std::max(worst, std::abs(static_cast<double>(inside) / points.size() - a * b));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("quasi-random sequence matches references and stratifies", "[criterion2]")
{
    bool pass = true;

    // First points of the base-2 radical-inverse coordinate in Gray-code order.
    const std::vector<double> known{0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125, 0.1875};
    SobolSequence one_d(1);
    std::vector<double> first16;
    for (int i = 0; i < 16; ++i) first16.push_back(one_d.next_point()[0]);
    for (std::size_t i = 0; i < known.size(); ++i) pass = pass && first16[i] == known[i];

    // Cross-check all 16 against the bundled generator reference (row 0 there
    // is the all-zero point this sequence skips).
    const std::string ref_text = read_text_file(data_dir() + "/sobol_reference_21d.csv");
    std::istringstream ref(ref_text);
    std::string line;
    for (int row = 0; row <= 16 && std::getline(ref, line); ++row) {
        if (row == 0) continue;
        const double expected = parse_double(split_csv_line(line)[0]);
        pass = pass && first16[static_cast<std::size_t>(row - 1)] == expected;
    }

    // Raw indices [2^k, 2^(k+1)) place one point in every aligned dyadic
    // interval of width 2^-k, per coordinate.
    bool stratified = true;
    for (int k = 1; k <= 8; ++k) {
        SobolSequence seq(7);
        const std::size_t block = std::size_t{1} << k;
        for (std::size_t skip = 0; skip < block - 1; ++skip) seq.next_point();
        std::vector<std::vector<int>> counts(7, std::vector<int>(block, 0));
        for (std::size_t i = 0; i < block; ++i) {
            const std::vector<double> p = seq.next_point();
            for (std::size_t d = 0; d < 7; ++d)
                ++counts[d][static_cast<std::size_t>(p[d] * static_cast<double>(block))];
        }
        for (std::size_t d = 0; d < 7; ++d)
            for (std::size_t c = 0; c < block; ++c) stratified = stratified && counts[d][c] == 1;
    }
    pass = pass && stratified;

    SobolSequence two_d(2);
    std::vector<std::vector<double>> sobol_points;
    for (int i = 0; i < 256; ++i) sobol_points.push_back(two_d.next_point());
    const double sobol_disc = star_discrepancy_2d(sobol_points, 64);
    Rng rng(123);
    double random_total = 0.0;
    for (int set = 0; set < 20; ++set) {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 256; ++i) pts.push_back({uniform01(rng), uniform01(rng)});
        random_total += star_discrepancy_2d(pts, 64);
    }
    const double random_mean = random_total / 20.0;
    pass = pass && sobol_disc < random_mean;

    report(2, pass,
           "first 16 points exact, dyadic stratification holds for k <= 8 in 7 dimensions, "
           "2D star discrepancy " +
               format_double(sobol_disc) + " beats random mean " + format_double(random_mean));
    CHECK(pass);
}

TEST_CASE("simulation invariants hold across seeded runs", "[criterion3]")
{
    const ParameterSpace space = default_space();
    SimulationConfig config;
    config.population = 200;
    config.initial_infected = 10;
    config.days = 41;

    bool conservation = true, absorbing = true, immobile = true, contained = true;
    Rng sampler(31415);
    for (int run = 0; run < 100; ++run) {
        const ParameterVector params = sample_uniform(space, sampler);
        const VirusParams p = VirusParams::from_vector(params);
        Rng rng(static_cast<std::uint64_t>(9000 + run));
        AbmState state(config, rng);
        std::vector<Agent> before = state.agents();
        for (int day = 1; day < config.days; ++day) {
            state.step(p, rng);
            const std::vector<Agent>& now = state.agents();
            conservation = conservation && now.size() == 200;
            for (std::size_t i = 0; i < now.size(); ++i) {
                contained = contained && now[i].x >= 0.0 && now[i].x <= 1.0 &&
                            now[i].y >= 0.0 && now[i].y <= 1.0;
                if (before[i].state == HealthState::dead) {
                    absorbing = absorbing && now[i].state == HealthState::dead &&
                                now[i].x == before[i].x && now[i].y == before[i].y;
                }
                if (before[i].quarantined && now[i].state == HealthState::infected) {
                    immobile = immobile && now[i].x == before[i].x && now[i].y == before[i].y;
                }
            }
            before = now;
        }
    }

    bool quiet_edges = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ParameterVector no_spread = clamp(space, {0.0, 0.5, 0.1, 10, 5, 0.3, 0.02});
        const ParameterVector no_contact = clamp(space, {0.9, 0.5, 0.1, 10, 5, 0.3, 0.0});
        for (const ParameterVector& params : {no_spread, no_contact}) {
            const EpidemicSeries series = simulate(params, config, seed);
            quiet_edges = quiet_edges && series[0] == config.initial_infected;
            for (std::size_t d = 1; d < series.size(); ++d)
                quiet_edges = quiet_edges && series[d] == 0;
        }
    }

    const bool pass = conservation && absorbing && immobile && contained && quiet_edges;
    report(3, pass,
           "population conserved, death absorbing, quarantine immobile, agents stay in the "
           "unit square over 100 runs; zero transmission and zero radius spread nothing");
    CHECK(conservation);
    CHECK(absorbing);
    CHECK(immobile);
    CHECK(contained);
    CHECK(quiet_edges);
}

TEST_CASE("every strategy recovers a one-parameter truth at desk scale", "[criterion4]")
{
    const ParameterSpace full = default_space();
    const ParameterVector theta = churn_truth();

    struct Cell {
        const char* tag;
        StrategyKind kind;
        SurrogateFamily family;
        int hits = 0;
    };
    std::vector<Cell> cells = {
        {"random", StrategyKind::random_baseline, SurrogateFamily::gradient_boosted_trees},
        {"msrs+svm", StrategyKind::msrs, SurrogateFamily::support_vector_machine},
        {"dycors+gbt", StrategyKind::dycors, SurrogateFamily::gradient_boosted_trees},
    };

    for (Cell& cell : cells) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            FrameworkConfig config;
            config.strategy.kind = cell.kind;
            config.surrogate_family = cell.family;
            config.simulation = churn_simulation();
            config.abm_min_budget = 50;
            config.abm_max_budget = 250;
            config.batch_size = 25;
            config.ks_threshold = 0.01;
            config.seed = seed;
            config.space.specs = {full.specs[0]};
            config.embedding = ParameterEmbedding{theta, {0}};
            const SanityOutcome outcome = sanity_check(theta, config);
            if (outcome.ksts <= 0.01) ++cell.hits;
        }
    }

    const bool pass = std::all_of(cells.begin(), cells.end(),
                                  [](const Cell& c) { return c.hits >= 8; });
    report(4, pass,
           "transmission probability recovered to ksts <= 0.01 in " +
               std::to_string(cells[0].hits) + "/10 (random), " + std::to_string(cells[1].hits) +
               "/10 (msrs+svm), " + std::to_string(cells[2].hits) + "/10 (dycors+gbt) seeds");
    for (const Cell& cell : cells) {
        INFO(cell.tag);
        CHECK(cell.hits >= 8);
    }
}

TEST_CASE("surrogate strategies outpace the random baseline", "[criterion5]")
{
    // Truth sits in a deep, narrow basin: the seeded half-population cohort
    // recovers in lockstep every ten days, so the scaled cumulative curve
    // carries a day-0 jump plus a phase-locked staircase that only a close
    // (transmission, infection-period) pair reproduces. Random probing matches
    // it rarely while the basin shoulder is wide enough for a 100-point design
    // of experiments to capture, which is the regime where surrogate guidance
    // pays off.
    const ParameterSpace full = default_space();
    const ParameterVector theta = clamp(full, {0.3, 1.0, 0.0, 10.0, 41.0, 0.8, 0.022});
    SimulationConfig sim;
    sim.population = 700;
    sim.initial_infected = 350;
    sim.days = 41;

    struct Cell {
        const char* tag;
        StrategyKind kind;
        SurrogateFamily family;
        std::vector<RunResult> runs;
    };
    std::vector<Cell> cells = {
        {"random", StrategyKind::random_baseline, SurrogateFamily::gradient_boosted_trees},
        {"msrs+svm", StrategyKind::msrs, SurrogateFamily::support_vector_machine},
        {"dycors+gbt", StrategyKind::dycors, SurrogateFamily::gradient_boosted_trees},
    };

    for (int repeat = 0; repeat < 10; ++repeat) {
        const EpidemicSeries target =
            simulate(theta, sim, mix_seed(900, static_cast<std::uint64_t>(repeat)));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            FrameworkConfig config;
            config.strategy.kind = cells[c].kind;
            config.surrogate_family = cells[c].family;
            config.simulation = sim;
            config.abm_min_budget = 100;
            config.abm_max_budget = 1000;
            config.batch_size = 50;
            config.ks_threshold = 0.02;
            config.seed = mix_seed(7000 + c, static_cast<std::uint64_t>(repeat));
            config.space.specs = {full.specs[0], full.specs[3]};
            config.embedding = ParameterEmbedding{theta, {0, 3}};
            cells[c].runs.push_back(run_calibration(config, target));
        }
    }

    const auto gain = [&](const Cell& cell) {
        return speedup(cell.runs, cells[0].runs, 0.98);
    };
    const auto fmt = [](const std::optional<double>& s) {
        return s ? format_double(*s) : std::string("na");
    };
    const std::optional<double> msrs_gain = gain(cells[1]);
    const std::optional<double> dycors_gain = gain(cells[2]);

    const bool pass = msrs_gain && *msrs_gain >= 1.5 && dycors_gain && *dycors_gain >= 1.5;
    report(5, pass,
           "two-parameter speedup over the random baseline at the 98% level: msrs+svm " +
               fmt(msrs_gain) + "x, dycors+gbt " + fmt(dycors_gain) + "x (>= 1.5x required)");
    REQUIRE(msrs_gain.has_value());
    REQUIRE(dycors_gain.has_value());
    CHECK(*msrs_gain >= 1.5);
    CHECK(*dycors_gain >= 1.5);
}

TEST_CASE("success fractions and best-so-far traces are monotone", "[criterion6]")
{
    const ParameterSpace full = default_space();
    const std::vector<StrategyKind> kinds = {
        StrategyKind::random_baseline, StrategyKind::sobol_baseline, StrategyKind::sa_random,
        StrategyKind::sa_sobol,        StrategyKind::msrs,           StrategyKind::dycors,
        StrategyKind::cmaes};
    const std::vector<SurrogateFamily> families = {SurrogateFamily::decision_tree,
                                                   SurrogateFamily::gradient_boosted_trees,
                                                   SurrogateFamily::support_vector_machine};

    Rng rng(2024);
    bool traces_monotone = true;
    bool traces_consistent = true;
    std::vector<RunResult> runs;
    for (int i = 0; i < 50; ++i) {
        FrameworkConfig config;
        config.strategy.kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
        config.surrogate_family = families[static_cast<std::size_t>(i) % families.size()];
        config.simulation.population = 100 + 50 * (i % 3);
        config.simulation.initial_infected = 5 + 5 * (i % 2);
        config.simulation.days = 15 + 10 * (i % 2);
        config.abm_min_budget = 20 + 20 * (i % 2);
        config.abm_max_budget = 60 + 20 * (i % 2);
        config.batch_size = 10 + 10 * (i % 2);
        config.ks_threshold = 0.05;
        config.seed = 1000 + static_cast<std::uint64_t>(i);

        const ParameterVector theta = sample_uniform(full, rng);
        const EpidemicSeries target =
            simulate(theta, config.simulation, mix_seed(7777, static_cast<std::uint64_t>(i)));
        RunResult result = run_calibration(config, target);

        double prev = 1.0 + 1e-9;
        for (const auto& [evals, ksts] : result.best_ksts_trace) {
            traces_monotone = traces_monotone && ksts <= prev;
            prev = ksts;
        }
        traces_consistent = traces_consistent && !result.best_ksts_trace.empty() &&
                            result.best_ksts_trace.back().first == result.evaluations_used &&
                            result.best_ksts_trace.back().second == result.optimal_ksts;
        runs.push_back(std::move(result));
    }

    bool success_monotone = true;
    for (std::size_t group = 0; group < 5; ++group) {
        const std::vector<RunResult> slice(runs.begin() + static_cast<long>(group * 10),
                                           runs.begin() + static_cast<long>(group * 10 + 10));
        success_monotone =
            success_monotone && success_at(slice, 0.99) <= success_at(slice, 0.98);
    }
    success_monotone = success_monotone && success_at(runs, 0.99) <= success_at(runs, 0.98);

    const bool pass = traces_monotone && traces_consistent && success_monotone;
    report(6, pass,
           "best-so-far traces non-increasing and consistent on 50 randomized runs; "
           "success@99% <= success@98% in every report");
    CHECK(traces_monotone);
    CHECK(traces_consistent);
    CHECK(success_monotone);
}

TEST_CASE("evolution strategy descends an exact quadratic bowl", "[criterion7]")
{
    ParameterSpace box;
    box.specs = {{"x1", 0.0, 1.0, ParamKind::continuous},
                 {"x2", 0.0, 1.0, ParamKind::continuous}};
    const ParameterVector target{0.3, 0.7};
    SurrogateView view;
    view.predict_value = [&](const ParameterVector& v) {
        const double dx = v[0] - target[0];
        const double dy = v[1] - target[1];
        return dx * dx + dy * dy;
    };

    StrategyConfig config;
    config.kind = StrategyKind::cmaes;
    config.batch_size = 20;

    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        StrategyState state;
        Rng rng(seed);
        for (int step = 0; step < 30; ++step) cmaes_step(config, state, view, box, rng);
        const double dx = state.cma_mean[0] - target[0];
        const double dy = state.cma_mean[1] - target[1];
        if (std::sqrt(dx * dx + dy * dy) <= 0.05) ++hits;
    }

    const bool pass = hits >= 9;
    report(7, pass,
           "population mean within 0.05 of the quadratic optimum in <= 30 steps for " +
               std::to_string(hits) + "/10 seeds");
    CHECK(hits >= 9);
}

TEST_CASE("the real-world pipeline calibrates an ingested wave", "[criterion8]")
{
    const EpidemicSeries target =
        ingest_cumulative_csv(data_dir() + "/confirmed_global_fixture.csv", "South Africa",
                              "2020-06-16", "2020-09-06");
    const bool window_ok = target.size() == 83;

    int hits = 0;
    double best_seen = 1.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        FrameworkConfig config;
        config.strategy.kind = StrategyKind::dycors;
        config.surrogate_family = SurrogateFamily::gradient_boosted_trees;
        config.simulation.population = 500;
        config.simulation.initial_infected = 10;
        config.simulation.days = static_cast<int>(target.size());
        config.abm_min_budget = 100;
        config.abm_max_budget = 600;
        config.batch_size = 50;
        config.ks_threshold = 0.06;
        config.seed = seed;
        const RunResult result = run_calibration(config, target);
        best_seen = std::min(best_seen, result.optimal_ksts);
        if (result.optimal_ksts <= 0.06) ++hits;
    }

    const bool pass = window_ok && hits >= 7;
    report(8, pass,
           "ingested case counts span " + std::to_string(target.size()) +
               " days; seven-parameter calibration reached ksts <= 0.06 in " +
               std::to_string(hits) + "/10 seeds (best " + format_double(best_seen) + ")");
    CHECK(window_ok);
    CHECK(hits >= 7);
}

TEST_CASE("repeated command-line runs are byte-identical", "[criterion9]")
{
    const auto dir = std::filesystem::temp_directory_path() / "abmcal_acceptance";
    std::filesystem::create_directories(dir);
    const auto path = [&](const std::string& name) { return (dir / name).string(); };

    bool pass = true;

    pass = pass && run_cli("simulate --params 0.5,0.05,0.02,12,6,0.06,0.015 --days 20 "
                           "--seed 41 --out \"" +
                           path("sim1.csv") + "\"") == 0;
    pass = pass && run_cli("simulate --params 0.5,0.05,0.02,12,6,0.06,0.015 --days 20 "
                           "--seed 41 --out \"" +
                           path("sim2.csv") + "\"") == 0;
    pass = pass && read_text_file(path("sim1.csv")) == read_text_file(path("sim2.csv"));

    FrameworkConfig config;
    config.strategy.kind = StrategyKind::dycors;
    config.surrogate_family = SurrogateFamily::gradient_boosted_trees;
    config.simulation.population = 120;
    config.simulation.initial_infected = 6;
    config.simulation.days = 20;
    config.abm_min_budget = 20;
    config.abm_max_budget = 60;
    config.batch_size = 20;
    config.seed = 9;
    write_text_file(path("config.json"), dump_json(to_json(config)));

    const std::string calibrate = "calibrate --config \"" + path("config.json") +
                                  "\" --target \"" + path("sim1.csv") + "\"";
    pass = pass && run_cli(calibrate + " --out \"" + path("run1.json") + "\"") == 0;
    pass = pass && run_cli(calibrate + " --out \"" + path("run2.json") + "\"") == 0;
    pass = pass && read_text_file(path("run1.json")) == read_text_file(path("run2.json"));
    pass = pass && read_text_file(path("run1.json") + ".db.csv") ==
                       read_text_file(path("run2.json") + ".db.csv");

    report(9, pass,
           "simulate and calibrate reruns with identical flags and seeds reproduce their "
           "outputs byte for byte");
    CHECK(pass);
}
