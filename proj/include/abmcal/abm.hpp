#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "abmcal/ks.hpp"
#include "abmcal/param_space.hpp"
#include "abmcal/random.hpp"

namespace abmcal {

struct SimulationConfig {
    int population = 1000;
    int initial_infected = 10;
    int days = 41;
    double alpha = 0.05;

    void validate() const
    {
        if (population < 1) throw std::invalid_argument("SimulationConfig: population must be >= 1");
        if (initial_infected <= 0 || initial_infected >= population)
            throw std::invalid_argument("SimulationConfig: need 0 < initial_infected < population");
        if (days < 1) throw std::invalid_argument("SimulationConfig: days must be >= 1");
    }
};

enum class HealthState { susceptible, infected, recovered, dead };

struct Agent {
    double x = 0.0;
    double y = 0.0;
    HealthState state = HealthState::susceptible;
    int days_infected = 0;
    bool quarantined = false;
};

// The seven calibrated parameters, decoded from a Table-1-ordered vector.
struct VirusParams {
    double transmission_probability;
    double reinfection_probability;
    double death_probability;
    int infection_period;
    int detection_time;
    double speed;
    double interaction_radius;

    static VirusParams from_vector(const ParameterVector& v)
    {
        if (v.size() != 7)
            throw std::invalid_argument("VirusParams: expected 7 parameters, got " +
                                        std::to_string(v.size()));
        return VirusParams{v[0], v[1], v[2], static_cast<int>(std::llround(v[3])),
                           static_cast<int>(std::llround(v[4])), v[5], v[6]};
    }
};

namespace detail {

inline double reflect_unit(double x)
{
    while (x < 0.0 || x > 1.0) {
        if (x < 0.0) x = -x;
        if (x > 1.0) x = 2.0 - x;
    }
    return x;
}

// Uniform bucket grid over the unit square; cell size stays >= radius so a
// 3x3 neighbourhood always covers the interaction disc.
class NeighborGrid {
public:
    NeighborGrid(const std::vector<Agent>& agents, double radius)
    {
        cells_per_side_ = radius > 0.0
                              ? std::clamp(static_cast<int>(std::floor(1.0 / radius)), 1, 64)
                              : 1;
        buckets_.resize(static_cast<std::size_t>(cells_per_side_) * cells_per_side_);
        for (std::size_t i = 0; i < agents.size(); ++i)
            buckets_[cell_of(agents[i].x, agents[i].y)].push_back(i);
    }

    template <typename Fn>
    void for_each_near(double x, double y, Fn&& fn) const
    {
        const int cx = cell_coord(x);
        const int cy = cell_coord(y);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                const int nx = cx + dx;
                const int ny = cy + dy;
                if (nx < 0 || ny < 0 || nx >= cells_per_side_ || ny >= cells_per_side_) continue;
                for (std::size_t idx : buckets_[static_cast<std::size_t>(ny) * cells_per_side_ + nx])
                    fn(idx);
            }
        }
    }

private:
    int cell_coord(double v) const
    {
        int c = static_cast<int>(v * cells_per_side_);
        return std::clamp(c, 0, cells_per_side_ - 1);
    }
    std::size_t cell_of(double x, double y) const
    {
        return static_cast<std::size_t>(cell_coord(y)) * cells_per_side_ + cell_coord(x);
    }

    int cells_per_side_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

} // namespace detail

// Mutable simulation state plus the one-day transition. Each day applies, in
// order: movement, transmission, disease progression.
class AbmState {
public:
    AbmState(const SimulationConfig& config, Rng& rng)
    {
        config.validate();
        agents_.resize(static_cast<std::size_t>(config.population));
        for (auto& a : agents_) {
            a.x = uniform01(rng);
            a.y = uniform01(rng);
        }
        for (int i = 0; i < config.initial_infected; ++i)
            agents_[static_cast<std::size_t>(i)].state = HealthState::infected;
    }

    explicit AbmState(std::vector<Agent> agents) : agents_(std::move(agents))
    {
        if (agents_.empty()) throw std::invalid_argument("AbmState: empty population");
    }

    const std::vector<Agent>& agents() const { return agents_; }

    int step(const VirusParams& p, Rng& rng)
    {
        move(p, rng);
        std::vector<std::size_t> newly = transmit(p, rng);
        progress(p, rng, newly);
        return static_cast<int>(newly.size());
    }

private:
    void move(const VirusParams& p, Rng& rng)
    {
        if (p.speed <= 0.0) return;
        for (auto& a : agents_) {
            if (a.state == HealthState::dead || a.quarantined) continue;
            const double heading = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
            const double dist = uniform_real(rng, 0.0, p.speed);
            a.x = detail::reflect_unit(a.x + dist * std::cos(heading));
            a.y = detail::reflect_unit(a.y + dist * std::sin(heading));
        }
    }

    std::vector<std::size_t> transmit(const VirusParams& p, Rng& rng)
    {
        std::vector<std::size_t> newly;
        if (p.interaction_radius <= 0.0 || p.transmission_probability <= 0.0) return newly;

        // Snapshot of today's infectious agents; agents infected during this
        // phase become infectious tomorrow.
        std::vector<std::size_t> infectious;
        for (std::size_t i = 0; i < agents_.size(); ++i)
            if (agents_[i].state == HealthState::infected) infectious.push_back(i);
        if (infectious.empty()) return newly;

        const detail::NeighborGrid grid(agents_, p.interaction_radius);
        const double r2 = p.interaction_radius * p.interaction_radius;
        for (std::size_t src : infectious) {
            const Agent& carrier = agents_[src];
            grid.for_each_near(carrier.x, carrier.y, [&](std::size_t tgt) {
                if (tgt == src) return;
                Agent& other = agents_[tgt];
                if (other.state != HealthState::susceptible && other.state != HealthState::recovered)
                    return;
                const double dx = other.x - carrier.x;
                const double dy = other.y - carrier.y;
                if (dx * dx + dy * dy > r2) return;
                double prob = p.transmission_probability;
                if (other.state == HealthState::recovered) prob *= p.reinfection_probability;
                if (uniform01(rng) < prob) {
                    other.state = HealthState::infected;
                    other.days_infected = 0;
                    newly.push_back(tgt);
                }
            });
        }
        return newly;
    }

    void progress(const VirusParams& p, Rng& rng, const std::vector<std::size_t>& newly)
    {
        std::vector<bool> is_new(agents_.size(), false);
        for (std::size_t i : newly) is_new[i] = true;
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            Agent& a = agents_[i];
            if (a.state != HealthState::infected) continue;
            if (!is_new[i]) ++a.days_infected;
            if (a.days_infected >= p.detection_time) a.quarantined = true;
            if (a.days_infected >= p.infection_period) {
                a.state = uniform01(rng) < p.death_probability ? HealthState::dead
                                                               : HealthState::recovered;
                a.days_infected = 0;
                a.quarantined = false;
            }
        }
    }

    std::vector<Agent> agents_;
};

// Runs the epidemic and reports new infections per day. Day 0 records the
// initial seeding, so the series total is never zero.
inline EpidemicSeries simulate(const ParameterVector& params, const SimulationConfig& config,
                               std::uint64_t seed)
{
    const VirusParams p = VirusParams::from_vector(params);
    Rng rng(seed);
    AbmState state(config, rng);
    EpidemicSeries series(static_cast<std::size_t>(config.days), 0);
    series[0] = config.initial_infected;
    for (int day = 1; day < config.days; ++day)
        series[static_cast<std::size_t>(day)] = state.step(p, rng);
    return series;
}

} // namespace abmcal
