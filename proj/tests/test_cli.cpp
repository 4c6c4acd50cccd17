#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "abmcal/serialization.hpp"

using namespace abmcal;

namespace {

std::string cli_path()
{
    const char* path = std::getenv("ABMCAL_CLI");
    REQUIRE(path != nullptr);
    return path;
}

std::filesystem::path scratch_dir()
{
    const auto dir = std::filesystem::temp_directory_path() / "abmcal_cli_scratch";
    std::filesystem::create_directories(dir);
    return dir;
}

int run(const std::string& args)
{
    const std::string cmd = "\"" + cli_path() + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string quoted(const std::filesystem::path& p)
{
    return "\"" + p.string() + "\"";
}

} // namespace

TEST_CASE("help and usage exit codes", "[cli]")
{
    CHECK(run("--help") == 0);
    CHECK(run("simulate --help") == 0);
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("simulate --out /tmp/x.csv") == 2);
    CHECK(run("simulate --params 0,0,0,14,7,0.05,0.01 --out /tmp/x.csv --bogus") == 2);
}

TEST_CASE("simulate subcommand writes the series", "[cli]")
{
    const auto out = scratch_dir() / "zero_beta.csv";
    CHECK(run("simulate --params 0,0,0,14,7,0.05,0.01 --days 10 --seed 3 --out " +
              quoted(out)) == 0);

    const EpidemicSeries series = series_from_csv(read_text_file(out.string()));
    REQUIRE(series.size() == 10);
    CHECK(series[0] == 10);
    for (std::size_t d = 1; d < series.size(); ++d) CHECK(series[d] == 0);

    CHECK(run("simulate --params 1,2,3 --out " + quoted(out)) == 1);
}

TEST_CASE("ingest subcommand converts cumulative counts", "[cli]")
{
    const char* data = std::getenv("ABMCAL_DATA_DIR");
    REQUIRE(data != nullptr);
    const std::string toy = std::string(data) + "/toy_cumulative.csv";
    const auto out = scratch_dir() / "toy_series.csv";

    CHECK(run("ingest --csv \"" + toy +
              "\" --region Toyland --from 2020-01-22 --to 2020-01-24 --out " +
              quoted(out)) == 0);
    CHECK(series_from_csv(read_text_file(out.string())) == EpidemicSeries{1, 2, 3});

    CHECK(run("ingest --csv \"" + toy +
              "\" --region Atlantis --from 2020-01-22 --to 2020-01-24 --out " +
              quoted(out)) == 1);
    CHECK(run("ingest --csv /nonexistent.csv --region Toyland --from 2020-01-22 "
              "--to 2020-01-24 --out " +
              quoted(out)) == 1);
}

TEST_CASE("calibrate reruns with one seed are byte-identical", "[cli]")
{
    const auto dir = scratch_dir();
    const auto config_path = dir / "config.json";
    const auto target_path = dir / "target.csv";

    FrameworkConfig config;
    config.strategy.kind = StrategyKind::random_baseline;
    config.simulation.population = 120;
    config.simulation.initial_infected = 6;
    config.simulation.days = 20;
    config.abm_min_budget = 20;
    config.abm_max_budget = 40;
    config.batch_size = 20;
    config.seed = 9;
    write_text_file(config_path.string(), dump_json(to_json(config)));

    CHECK(run("simulate --params 0.5,0.05,0.02,12,6,0.06,0.015 --days 20 --seed 41 --out " +
              quoted(target_path)) == 0);

    const auto out1 = dir / "result1.json";
    const auto out2 = dir / "result2.json";
    const std::string common =
        "calibrate --config " + quoted(config_path) + " --target " + quoted(target_path);
    CHECK(run(common + " --out " + quoted(out1)) == 0);
    CHECK(run(common + " --out " + quoted(out2)) == 0);

    const std::string first = read_text_file(out1.string());
    CHECK(first == read_text_file(out2.string()));
    CHECK(read_text_file(out1.string() + ".db.csv") ==
          read_text_file(out2.string() + ".db.csv"));
    CHECK(read_text_file(out1.string() + ".fit_simulated.csv") ==
          read_text_file(out2.string() + ".fit_simulated.csv"));

    const nlohmann::json j = nlohmann::json::parse(first);
    const RunResult result = run_result_from_json(j);
    CHECK(result.evaluations_used == 40);
    CHECK(result.optimal_ksts >= 0.0);
    CHECK(result.optimal_ksts <= 1.0);
    CHECK_FALSE(result.best_ksts_trace.empty());
    CHECK(j.contains("config"));

    CHECK(run("calibrate --config /nonexistent.json --target " + quoted(target_path) +
              " --out " + quoted(out1)) == 1);
}
