#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "abmcal/harness.hpp"
#include "abmcal/ingest.hpp"
#include "abmcal/serialization.hpp"

namespace {

using namespace abmcal;

ParameterVector parse_params(const std::string& csv)
{
    ParameterVector v;
    for (const std::string& field : split_csv_line(csv)) v.push_back(parse_double(field));
    if (v.size() != 7)
        throw std::invalid_argument("--params and --theta-star need 7 comma-separated values, got " +
                                    std::to_string(v.size()));
    return v;
}

void log_resolved_config(const FrameworkConfig& config)
{
    std::cerr << "resolved config: " << to_json(config).dump() << "\n";
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j)
{
    detail::require_known_keys(j,
                               {"n_repeats", "dims_to_calibrate", "strategies", "surrogates",
                                "config", "success_levels", "seed"},
                               "spec");
    ExperimentSpec spec;
    detail::assign_if(j, "n_repeats", spec.n_repeats);
    detail::assign_if(j, "dims_to_calibrate", spec.dims_to_calibrate);
    if (j.contains("strategies"))
        for (const auto& name : j.at("strategies"))
            spec.strategies.push_back(strategy_kind_from_string(name.get<std::string>()));
    if (j.contains("surrogates"))
        for (const auto& name : j.at("surrogates"))
            spec.surrogates.push_back(surrogate_family_from_string(name.get<std::string>()));
    if (j.contains("config")) spec.base_config = framework_config_from_json(j.at("config"));
    detail::assign_if(j, "success_levels", spec.success_levels);
    detail::assign_if(j, "seed", spec.seed);
    return spec;
}

// Tables: one CSV row per cell, columns mirroring the report layout.
std::string report_tables_csv(const BenchmarkReport& report, const std::string& metric)
{
    std::string out = "strategy,surrogate," + metric + "\n";
    for (const CellResult& cell : report.cells) {
        if (cell.runs.empty()) continue;
        double value = 0.0;
        if (metric == "mean_standardized_l2")
            value = mean_of(cell.distances);
        else
            value = cell_mean_ksts(cell);
        out += to_string(cell.strategy) + "," + to_string(cell.family) + "," +
               format_double(value) + "\n";
    }
    return out;
}

std::string report_success_csv(const BenchmarkReport& report)
{
    std::string out = "strategy,surrogate,level,success,speedup_vs_random_baseline\n";
    const CellResult* baseline = report.baseline_cell();
    for (const CellResult& cell : report.cells) {
        if (cell.runs.empty()) continue;
        for (double level : report.success_levels) {
            out += to_string(cell.strategy) + "," + to_string(cell.family) + "," +
                   format_double(level) + "," + format_double(success_at(cell.runs, level)) + ",";
            if (baseline != nullptr) {
                const auto s = speedup(cell.runs, baseline->runs, level);
                out += s ? format_double(*s) : std::string("na");
            } else {
                out += "na";
            }
            out += "\n";
        }
    }
    return out;
}

void write_fit_plots(const std::string& prefix, const EpidemicSeries& actual,
                     const ParameterVector& full_params, const SimulationConfig& sim,
                     std::uint64_t eval_seed)
{
    write_text_file(prefix + "_actual.csv", scaled_cumulative_csv(actual));
    const EpidemicSeries simulated = simulate(full_params, sim, eval_seed);
    write_text_file(prefix + "_simulated.csv", scaled_cumulative_csv(simulated));
}

int cmd_simulate(const std::string& params_csv, int days, std::uint64_t seed,
                 const std::string& out)
{
    const ParameterVector params = parse_params(params_csv);
    SimulationConfig sim;
    sim.days = days;
    std::cerr << "resolved config: " << to_json(sim).dump() << " seed=" << seed << "\n";
    const EpidemicSeries series = simulate(params, sim, seed);
    write_text_file(out, series_to_csv(series));
    return 0;
}

int cmd_calibrate(const std::string& config_path, const std::string& target_path,
                  const std::string& out, int jobs)
{
    FrameworkConfig config = load_framework_config(config_path);
    log_resolved_config(config);
    const EpidemicSeries target = series_from_csv(read_text_file(target_path));

    Calibration calib(config, target, jobs);
    const RunResult result = calib.run();

    nlohmann::json j = to_json(result);
    j["config"] = to_json(config);
    write_text_file(out, dump_json(j));

    const std::string stem = out + ".fit";
    const LabeledSample best = select_optimal(calib.database());
    const ParameterVector full =
        config.embedding.active() ? config.embedding.embed(best.params) : best.params;
    write_fit_plots(stem, target, full, config.simulation, best.seed);
    write_text_file(out + ".db.csv", db_to_csv(calib.database(), config.space.dimension()));
    return 0;
}

int cmd_sanity_check(const std::string& config_path, const std::string& theta_csv,
                     const std::string& out, int jobs)
{
    FrameworkConfig config = load_framework_config(config_path);
    log_resolved_config(config);
    const ParameterVector theta_star = parse_params(theta_csv);

    const SanityOutcome outcome = sanity_check(theta_star, config, jobs);
    nlohmann::json j{{"theta_star", theta_star},
                     {"distance_to_truth", outcome.distance_to_truth},
                     {"ksts", outcome.ksts},
                     {"result", to_json(outcome.result)},
                     {"config", to_json(config)}};
    write_text_file(out, dump_json(j));
    return 0;
}

int cmd_ingest(const std::string& csv, const std::string& region, const std::string& from,
               const std::string& to, const std::string& out)
{
    std::cerr << "resolved config: ingest region='" << region << "' from=" << from
              << " to=" << to << "\n";
    std::vector<std::string> warnings;
    const EpidemicSeries series = ingest_cumulative_csv(csv, region, from, to, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    write_text_file(out, series_to_csv(series));
    return 0;
}

int cmd_benchmark(const std::string& spec_path, const std::string& out_dir, int jobs)
{
    const ExperimentSpec spec =
        experiment_spec_from_json(nlohmann::json::parse(read_text_file(spec_path)));
    spec.validate();
    log_resolved_config(spec.base_config);
    std::cerr << "resolved spec: repeats=" << spec.n_repeats
              << " strategies=" << spec.strategies.size()
              << " surrogates=" << spec.surrogates.size() << " seed=" << spec.seed << "\n";

    const BenchmarkReport report = run_benchmark(spec, jobs);

    std::filesystem::create_directories(out_dir);
    const auto path = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    write_text_file(path("report.json"), dump_json(to_json(report)));
    write_text_file(path("l2.csv"), report_tables_csv(report, "mean_standardized_l2"));
    write_text_file(path("ksts.csv"), report_tables_csv(report, "mean_ksts"));
    write_text_file(path("success.csv"), report_success_csv(report));

    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const CellResult& cell = report.cells[c];
        if (cell.runs.empty()) continue;
        const std::string prefix = path("fit_" + to_string(cell.strategy) + "_" +
                                        to_string(cell.family));
        write_fit_plots(prefix, report.targets[cell.best_repeat], cell.best_full_params,
                        spec.base_config.simulation, cell.best_eval_seed);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Surrogate-assisted calibration of a continuous-space epidemic model"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "Concurrent simulation evaluations")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Run the epidemic model once");
    std::string sim_params, sim_out;
    int sim_days = 41;
    std::uint64_t sim_seed = 0;
    sim->add_option("--params", sim_params, "7 comma-separated parameter values")->required();
    sim->add_option("--days", sim_days, "Days to simulate");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--out", sim_out, "Output series CSV")->required();

    auto* cal = app.add_subcommand("calibrate", "Calibrate against a target series");
    std::string cal_config, cal_target, cal_out;
    cal->add_option("--config", cal_config, "Run configuration JSON")->required();
    cal->add_option("--target", cal_target, "Target series CSV")->required();
    cal->add_option("--out", cal_out, "Result JSON path")->required();

    auto* san = app.add_subcommand("sanity-check", "Calibrate against a known parameter vector");
    std::string san_config, san_theta, san_out;
    san->add_option("--config", san_config, "Run configuration JSON")->required();
    san->add_option("--theta-star", san_theta, "7 comma-separated true parameter values")
        ->required();
    san->add_option("--out", san_out, "Report JSON path")->required();

    auto* ing = app.add_subcommand("ingest", "Convert a cumulative case-count CSV to a target series");
    std::string ing_csv, ing_region, ing_from, ing_to, ing_out;
    ing->add_option("--csv", ing_csv, "Cumulative case-count CSV")->required();
    ing->add_option("--region", ing_region, "Country/Region value")->required();
    ing->add_option("--from", ing_from, "Start date (YYYY-MM-DD)")->required();
    ing->add_option("--to", ing_to, "End date (YYYY-MM-DD)")->required();
    ing->add_option("--out", ing_out, "Output series CSV")->required();

    auto* ben = app.add_subcommand("benchmark", "Run a strategy/surrogate benchmark grid");
    std::string ben_spec, ben_out;
    ben->add_option("--spec", ben_spec, "Experiment spec JSON")->required();
    ben->add_option("--out", ben_out, "Output report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_params, sim_days, sim_seed, sim_out);
        if (cal->parsed()) return cmd_calibrate(cal_config, cal_target, cal_out, jobs);
        if (san->parsed()) return cmd_sanity_check(san_config, san_theta, san_out, jobs);
        if (ing->parsed()) return cmd_ingest(ing_csv, ing_region, ing_from, ing_to, ing_out);
        if (ben->parsed()) return cmd_benchmark(ben_spec, ben_out, jobs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
