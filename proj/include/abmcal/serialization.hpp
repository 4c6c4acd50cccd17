#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "abmcal/framework.hpp"

namespace abmcal {

// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s)
{
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw std::runtime_error("bad numeric field: '" + s + "'");
    return v;
}

inline void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

// ---- epidemic series CSV (header: day,new_infections) ----

inline std::string series_to_csv(const EpidemicSeries& series)
{
    std::string out = "day,new_infections\n";
    for (std::size_t d = 0; d < series.size(); ++d)
        out += std::to_string(d) + "," + std::to_string(series[d]) + "\n";
    return out;
}

inline EpidemicSeries series_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line).size() < 2)
        throw std::runtime_error("series CSV: missing header");
    EpidemicSeries series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2) throw std::runtime_error("series CSV: bad row: " + line);
        series.push_back(static_cast<int>(std::stol(fields[1])));
    }
    if (series.empty()) throw std::runtime_error("series CSV: no rows");
    return series;
}

// ---- ground-truth database CSV ----

inline std::string db_to_csv(const GroundTruthDB& db, std::size_t dimension)
{
    std::string out = "iteration,seed,ksts,label";
    for (std::size_t i = 1; i <= dimension; ++i) out += ",p" + std::to_string(i);
    out += "\n";
    for (const LabeledSample& row : db.rows()) {
        out += std::to_string(row.iteration_index) + "," + std::to_string(row.seed) + "," +
               format_double(row.ksts) + "," + to_string(row.label);
        for (double p : row.params) out += "," + format_double(p);
        out += "\n";
    }
    return out;
}

// ---- JSON mappings ----

inline SurrogateFamily surrogate_family_from_string(const std::string& name)
{
    for (SurrogateFamily f :
         {SurrogateFamily::decision_tree, SurrogateFamily::gradient_boosted_trees,
          SurrogateFamily::support_vector_machine})
        if (to_string(f) == name) return f;
    throw std::invalid_argument("unknown surrogate family: " + name);
}

inline nlohmann::json to_json(const StrategyConfig& c)
{
    return {{"kind", to_string(c.kind)},
            {"batch_size", c.batch_size},
            {"inner_samples", c.inner_samples},
            {"inner_iterations", c.inner_iterations},
            {"epsilon", c.epsilon},
            {"weight_cycle", c.weight_cycle},
            {"f1_threshold", c.f1_threshold}};
}

inline nlohmann::json to_json(const SimulationConfig& c)
{
    return {{"population", c.population},
            {"initial_infected", c.initial_infected},
            {"days", c.days},
            {"alpha", c.alpha}};
}

inline nlohmann::json to_json(const ParameterSpace& space)
{
    nlohmann::json specs = nlohmann::json::array();
    for (const ParameterSpec& s : space.specs)
        specs.push_back({{"name", s.name},
                         {"lower", s.lower},
                         {"upper", s.upper},
                         {"kind", s.kind == ParamKind::integer_days ? "integer_days"
                                                                    : "continuous"}});
    return specs;
}

inline nlohmann::json to_json(const FrameworkConfig& c)
{
    nlohmann::json j{{"abm_min_budget", c.abm_min_budget},
                     {"abm_max_budget", c.abm_max_budget},
                     {"batch_size", c.batch_size},
                     {"ks_threshold", c.ks_threshold},
                     {"f1_threshold", c.f1_threshold},
                     {"rmse_threshold", c.rmse_threshold},
                     {"alpha", c.alpha},
                     {"strategy", to_json(c.strategy)},
                     {"surrogate_family", to_string(c.surrogate_family)},
                     {"simulation", to_json(c.simulation)},
                     {"seed", c.seed},
                     {"space", to_json(c.space)}};
    if (c.embedding.active())
        j["embedding"] = {{"base", c.embedding.base}, {"indices", c.embedding.indices}};
    return j;
}

namespace detail {

template <typename T>
void assign_if(const nlohmann::json& j, const char* key, T& target)
{
    if (j.contains(key)) target = j.at(key).get<T>();
}

inline void require_known_keys(const nlohmann::json& j,
                               std::initializer_list<const char*> known, const char* what)
{
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok)
            throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
    }
}

} // namespace detail

inline StrategyConfig strategy_config_from_json(const nlohmann::json& j)
{
    detail::require_known_keys(j,
                               {"kind", "batch_size", "inner_samples", "inner_iterations",
                                "epsilon", "weight_cycle", "f1_threshold"},
                               "strategy");
    StrategyConfig c;
    if (j.contains("kind")) c.kind = strategy_kind_from_string(j.at("kind").get<std::string>());
    detail::assign_if(j, "batch_size", c.batch_size);
    detail::assign_if(j, "inner_samples", c.inner_samples);
    detail::assign_if(j, "inner_iterations", c.inner_iterations);
    detail::assign_if(j, "epsilon", c.epsilon);
    detail::assign_if(j, "weight_cycle", c.weight_cycle);
    detail::assign_if(j, "f1_threshold", c.f1_threshold);
    return c;
}

inline SimulationConfig simulation_config_from_json(const nlohmann::json& j)
{
    detail::require_known_keys(j, {"population", "initial_infected", "days", "alpha"},
                               "simulation");
    SimulationConfig c;
    detail::assign_if(j, "population", c.population);
    detail::assign_if(j, "initial_infected", c.initial_infected);
    detail::assign_if(j, "days", c.days);
    detail::assign_if(j, "alpha", c.alpha);
    return c;
}

inline ParameterSpace parameter_space_from_json(const nlohmann::json& j)
{
    ParameterSpace space;
    for (const auto& item : j) {
        detail::require_known_keys(item, {"name", "lower", "upper", "kind"}, "space");
        ParameterSpec spec;
        spec.name = item.at("name").get<std::string>();
        spec.lower = item.at("lower").get<double>();
        spec.upper = item.at("upper").get<double>();
        const std::string kind = item.value("kind", "continuous");
        if (kind == "continuous")
            spec.kind = ParamKind::continuous;
        else if (kind == "integer_days")
            spec.kind = ParamKind::integer_days;
        else
            throw std::invalid_argument("space: unknown parameter kind '" + kind + "'");
        space.specs.push_back(std::move(spec));
    }
    return space;
}

inline FrameworkConfig framework_config_from_json(const nlohmann::json& j)
{
    detail::require_known_keys(j,
                               {"abm_min_budget", "abm_max_budget", "batch_size", "ks_threshold",
                                "f1_threshold", "rmse_threshold", "alpha", "strategy",
                                "surrogate_family", "simulation", "seed", "space", "embedding"},
                               "config");
    FrameworkConfig c;
    detail::assign_if(j, "abm_min_budget", c.abm_min_budget);
    detail::assign_if(j, "abm_max_budget", c.abm_max_budget);
    detail::assign_if(j, "batch_size", c.batch_size);
    detail::assign_if(j, "ks_threshold", c.ks_threshold);
    detail::assign_if(j, "f1_threshold", c.f1_threshold);
    detail::assign_if(j, "rmse_threshold", c.rmse_threshold);
    detail::assign_if(j, "alpha", c.alpha);
    if (j.contains("strategy")) c.strategy = strategy_config_from_json(j.at("strategy"));
    if (j.contains("surrogate_family"))
        c.surrogate_family = surrogate_family_from_string(j.at("surrogate_family").get<std::string>());
    if (j.contains("simulation")) c.simulation = simulation_config_from_json(j.at("simulation"));
    detail::assign_if(j, "seed", c.seed);
    if (j.contains("space")) c.space = parameter_space_from_json(j.at("space"));
    if (j.contains("embedding")) {
        detail::require_known_keys(j.at("embedding"), {"base", "indices"}, "embedding");
        c.embedding.base = j.at("embedding").at("base").get<ParameterVector>();
        c.embedding.indices = j.at("embedding").at("indices").get<std::vector<std::size_t>>();
    }
    return c;
}

inline FrameworkConfig load_framework_config(const std::string& path)
{
    return framework_config_from_json(nlohmann::json::parse(read_text_file(path)));
}

inline nlohmann::json to_json(const RunResult& r)
{
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [evals, ksts] : r.best_ksts_trace)
        trace.push_back(nlohmann::json::array({evals, ksts}));
    return {{"optimal", r.optimal},
            {"optimal_ksts", r.optimal_ksts},
            {"evaluations_used", r.evaluations_used},
            {"stop_reason", to_string(r.stop_reason)},
            {"trace", trace}};
}

inline RunResult run_result_from_json(const nlohmann::json& j)
{
    RunResult r;
    r.optimal = j.at("optimal").get<ParameterVector>();
    r.optimal_ksts = j.at("optimal_ksts").get<double>();
    r.evaluations_used = j.at("evaluations_used").get<long long>();
    r.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    for (const auto& point : j.at("trace"))
        r.best_ksts_trace.emplace_back(point.at(0).get<long long>(), point.at(1).get<double>());
    return r;
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

} // namespace abmcal
