#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace abmcal {

// Daily new-infection counts, one entry per simulated day.
using EpidemicSeries = std::vector<int>;

enum class Label { positive, negative };

inline const char* to_string(Label l) { return l == Label::positive ? "positive" : "negative"; }

// Scaled cumulative sum of a daily series. An all-zero source series cannot
// be normalised and is flagged degenerate instead of dividing by zero.
struct CumulativeDistribution {
    std::vector<double> values;
    bool degenerate = false;

    std::size_t size() const { return values.size(); }
};

inline CumulativeDistribution to_cdf(const EpidemicSeries& series)
{
    if (series.empty()) throw std::invalid_argument("to_cdf: empty series");
    CumulativeDistribution cdf;
    cdf.values.resize(series.size());
    double running = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        running += static_cast<double>(series[i]);
        cdf.values[i] = running;
    }
    if (running <= 0.0) {
        cdf.degenerate = true;
        std::fill(cdf.values.begin(), cdf.values.end(), 0.0);
        return cdf;
    }
    for (auto& v : cdf.values) v /= running;
    return cdf;
}

// Two-sample Kolmogorov-Smirnov statistic: the largest pointwise gap between
// the two scaled cumulative distributions. A degenerate side is maximally
// dissimilar from any non-degenerate one.
inline double ks_statistic(const CumulativeDistribution& actual, const CumulativeDistribution& simulated)
{
    if (actual.size() != simulated.size())
        throw std::invalid_argument("ks_statistic: length mismatch");
    if (actual.degenerate != simulated.degenerate) return 1.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sup = std::max(sup, std::abs(actual.values[i] - simulated.values[i]));
    return sup;
}

// c(alpha) = sqrt(-ln(alpha) / 2)
inline double ks_critical_coefficient(double alpha)
{
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("ks_critical_coefficient: alpha must lie in (0, 1)");
    return std::sqrt(-std::log(alpha) * 0.5);
}

// Rejection threshold c(alpha) * sqrt(2N / N^2), N = population size.
inline double critical_value(double alpha, long population)
{
    if (population < 1) throw std::invalid_argument("critical_value: population must be >= 1");
    const double n = static_cast<double>(population);
    return ks_critical_coefficient(alpha) * std::sqrt(2.0 * n / (n * n));
}

// Positive when the two distributions are close enough to pass the test;
// the rejection condition is strict, so a tie stays positive.
inline Label label_of(double statistic, double critical)
{
    if (statistic < 0.0 || critical < 0.0)
        throw std::invalid_argument("label_of: negative input");
    return statistic <= critical ? Label::positive : Label::negative;
}

} // namespace abmcal
