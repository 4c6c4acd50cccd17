#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmcal/ks.hpp"
#include "abmcal/serialization.hpp"

namespace abmcal {

using Date = std::chrono::year_month_day;

inline Date parse_iso_date(const std::string& s)
{
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
        throw std::invalid_argument("bad ISO date: '" + s + "'");
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw std::invalid_argument("invalid date: '" + s + "'");
    return date;
}

// The M/D/YY column headers used by the case-count files; YY means 20YY.
inline Date parse_mdy_date(const std::string& s)
{
    int m = 0, d = 0, y = 0;
    if (std::sscanf(s.c_str(), "%d/%d/%d", &m, &d, &y) != 3)
        throw std::invalid_argument("bad M/D/YY date: '" + s + "'");
    if (y < 100) y += 2000;
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw std::invalid_argument("invalid date: '" + s + "'");
    return date;
}

inline std::string iso_string(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

// Splits one CSV line honouring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_quoted(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

// First differences of a cumulative series; dips below zero clip to 0.
inline std::vector<double> difference_series(const std::vector<double>& cumulative,
                                             std::vector<std::string>* warnings = nullptr)
{
    if (cumulative.size() < 2)
        throw std::invalid_argument("difference_series: need at least 2 days");
    std::vector<double> daily(cumulative.size() - 1);
    for (std::size_t t = 0; t + 1 < cumulative.size(); ++t) {
        const double diff = cumulative[t + 1] - cumulative[t];
        if (diff < 0.0 && warnings != nullptr)
            warnings->push_back("non-monotone cumulative count at day index " + std::to_string(t) +
                                " (clipped to 0)");
        daily[t] = std::max(diff, 0.0);
    }
    return daily;
}

// Trailing moving average; entries without a full window keep their raw value.
inline std::vector<double> trailing_moving_average(const std::vector<double>& daily,
                                                   int window = 7)
{
    if (window < 1) throw std::invalid_argument("trailing_moving_average: window < 1");
    std::vector<double> out = daily;
    for (std::size_t t = static_cast<std::size_t>(window) - 1; t < daily.size(); ++t) {
        double sum = 0.0;
        for (int k = 0; k < window; ++k) sum += daily[t - static_cast<std::size_t>(k)];
        out[t] = sum / window;
    }
    return out;
}

struct CaseTable {
    std::vector<Date> dates;
    std::map<std::string, std::vector<double>> cumulative_by_region;
};

// Global confirmed-cases layout: Province/State, Country/Region, Lat, Long,
// then one cumulative-count column per date. Province rows sum per country.
inline CaseTable parse_case_table(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("case table: empty file");
    const auto header = split_csv_quoted(line);
    if (header.size() < 5 || header[1] != "Country/Region")
        throw std::runtime_error("case table: unexpected header layout");

    CaseTable table;
    for (std::size_t c = 4; c < header.size(); ++c)
        table.dates.push_back(parse_mdy_date(header[c]));

    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_quoted(line);
        if (fields.size() != header.size())
            throw std::runtime_error("case table: row width mismatch: " + line);
        auto& acc = table.cumulative_by_region[fields[1]];
        if (acc.empty()) acc.assign(table.dates.size(), 0.0);
        for (std::size_t c = 4; c < fields.size(); ++c)
            acc[c - 4] += parse_double(fields[c]);
    }
    return table;
}

inline EpidemicSeries ingest_cumulative_csv(const std::string& path, const std::string& region,
                                            const Date& start, const Date& end,
                                            std::vector<std::string>* warnings = nullptr)
{
    const CaseTable table = parse_case_table(read_text_file(path));
    const auto it = table.cumulative_by_region.find(region);
    if (it == table.cumulative_by_region.end())
        throw std::invalid_argument("unknown region: '" + region + "'");

    const std::vector<double> daily = difference_series(it->second, warnings);
    const std::vector<double> smooth = trailing_moving_average(daily);

    const auto start_days = std::chrono::sys_days(start);
    const auto end_days = std::chrono::sys_days(end);
    if (end_days < start_days) throw std::invalid_argument("date range reversed");

    EpidemicSeries series;
    // daily[t] pairs the current day with the next one, so the final date
    // column has no value of its own.
    for (std::size_t t = 0; t < smooth.size(); ++t) {
        const auto day = std::chrono::sys_days(table.dates[t]);
        if (day < start_days || day > end_days) continue;
        series.push_back(static_cast<int>(std::max<long long>(0, std::llround(smooth[t]))));
    }
    const auto expected =
        std::chrono::duration_cast<std::chrono::days>(end_days - start_days).count() + 1;
    if (static_cast<long long>(series.size()) != expected)
        throw std::invalid_argument("date range not fully covered by file (got " +
                                    std::to_string(series.size()) + " of " +
                                    std::to_string(expected) + " days)");
    return series;
}

inline EpidemicSeries ingest_cumulative_csv(const std::string& path, const std::string& region,
                                            const std::string& start_iso,
                                            const std::string& end_iso,
                                            std::vector<std::string>* warnings = nullptr)
{
    return ingest_cumulative_csv(path, region, parse_iso_date(start_iso), parse_iso_date(end_iso),
                                 warnings);
}

} // namespace abmcal
