#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace abmcal {

// All stochastic code draws from an explicitly seeded engine. Distribution
// transforms are hand-rolled so that a (seed, call sequence) pair produces the
// same stream on every standard library.
using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [lo, hi], both inclusive.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi)
{
    const auto span = static_cast<double>(hi - lo + 1);
    auto draw = lo + static_cast<std::int64_t>(uniform01(rng) * span);
    return draw > hi ? hi : draw;
}

// Box-Muller without the cached second variate; two uniforms per call.
inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0)
{
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * mag * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable derivation of sub-stream seeds, e.g. per-candidate simulation seeds
// from (run seed, row index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return splitmix64(a ^ splitmix64(b));
}

} // namespace abmcal
