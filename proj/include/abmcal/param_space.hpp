#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmcal/random.hpp"

namespace abmcal {

// A point in the calibration space. The enclosing ParameterSpace carries the
// semantics (bounds, integer-day coordinates).
using ParameterVector = std::vector<double>;

enum class ParamKind { continuous, integer_days };

struct ParameterSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    ParamKind kind = ParamKind::continuous;

    double range() const { return upper - lower; }
};

struct ParameterSpace {
    std::vector<ParameterSpec> specs;

    std::size_t dimension() const { return specs.size(); }

    void require_dimension(std::size_t d, const char* what) const
    {
        if (d != specs.size())
            throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                        std::to_string(specs.size()) + ", got " + std::to_string(d));
    }
};

// The seven calibrated parameters of the virus-spread model, in their
// canonical order. Infection period and detection time are whole days.
inline ParameterSpace default_space()
{
    return ParameterSpace{{
        {"transmission_probability", 0.0, 1.0, ParamKind::continuous},
        {"reinfection_probability", 0.0, 1.0, ParamKind::continuous},
        {"death_probability", 0.0, 1.0, ParamKind::continuous},
        {"infection_period", 0.0, 41.0, ParamKind::integer_days},
        {"detection_time", 0.0, 41.0, ParamKind::integer_days},
        {"speed", 0.0, 1.0, ParamKind::continuous},
        {"interaction_radius", 0.0, 0.022, ParamKind::continuous},
    }};
}

inline ParameterVector sample_uniform(const ParameterSpace& space, Rng& rng)
{
    ParameterVector v(space.dimension());
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        const auto& spec = space.specs[i];
        if (spec.kind == ParamKind::integer_days) {
            v[i] = static_cast<double>(uniform_int(rng, static_cast<std::int64_t>(spec.lower),
                                                   static_cast<std::int64_t>(spec.upper)));
        } else {
            v[i] = uniform_real(rng, spec.lower, spec.upper);
        }
    }
    return v;
}

// Projects onto the box; integer-day coordinates are rounded to the nearest
// whole day after projection.
inline ParameterVector clamp(const ParameterSpace& space, const ParameterVector& v)
{
    space.require_dimension(v.size(), "clamp");
    ParameterVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& spec = space.specs[i];
        double x = v[i];
        if (x < spec.lower) x = spec.lower;
        if (x > spec.upper) x = spec.upper;
        if (spec.kind == ParamKind::integer_days) x = static_cast<double>(std::llround(x));
        out[i] = x;
    }
    return out;
}

// Gaussian perturbation of the masked coordinates around `center`, clamped
// back into the box. `require_mask` enforces the DYCORS contract that at
// least one coordinate is perturbed.
inline ParameterVector perturb_gaussian(const ParameterSpace& space, const ParameterVector& center,
                                        const std::vector<double>& sigma, const std::vector<bool>& mask,
                                        Rng& rng, bool require_mask = false)
{
    space.require_dimension(center.size(), "perturb_gaussian center");
    space.require_dimension(sigma.size(), "perturb_gaussian sigma");
    space.require_dimension(mask.size(), "perturb_gaussian mask");
    if (require_mask) {
        bool any = false;
        for (bool m : mask) any = any || m;
        if (!any) throw std::invalid_argument("perturb_gaussian: empty perturbation mask");
    }
    ParameterVector out(center.size());
    for (std::size_t i = 0; i < center.size(); ++i)
        out[i] = mask[i] ? center[i] + normal(rng, 0.0, sigma[i]) : center[i];
    return clamp(space, out);
}

// Range-normalised Euclidean distance; the accuracy metric for comparing a
// predicted optimum against the synthetic truth.
inline double standardized_l2(const ParameterSpace& space, const ParameterVector& a,
                              const ParameterVector& b)
{
    space.require_dimension(a.size(), "standardized_l2");
    space.require_dimension(b.size(), "standardized_l2");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scaled = (a[i] - b[i]) / space.specs[i].range();
        sum += scaled * scaled;
    }
    return std::sqrt(sum);
}

inline bool contains(const ParameterSpace& space, const ParameterVector& v)
{
    if (v.size() != space.dimension()) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& spec = space.specs[i];
        if (v[i] < spec.lower || v[i] > spec.upper) return false;
        if (spec.kind == ParamKind::integer_days && v[i] != std::floor(v[i])) return false;
    }
    return true;
}

// Map to / from the unit cube; surrogates and CMA-ES operate in normalised
// coordinates because the raw ranges span three orders of magnitude.
inline ParameterVector normalize(const ParameterSpace& space, const ParameterVector& v)
{
    space.require_dimension(v.size(), "normalize");
    ParameterVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = (v[i] - space.specs[i].lower) / space.specs[i].range();
    return out;
}

inline ParameterVector denormalize(const ParameterSpace& space, const ParameterVector& u)
{
    space.require_dimension(u.size(), "denormalize");
    ParameterVector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = space.specs[i].lower + u[i] * space.specs[i].range();
    return out;
}

} // namespace abmcal
