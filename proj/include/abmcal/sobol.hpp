#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "abmcal/param_space.hpp"

namespace abmcal {

namespace detail {

// Joe-Kuo D(6) primitive polynomials and initial direction integers for
// dimensions 2..21 (dimension 1 is the plain van der Corput sequence).
struct SobolRow {
    unsigned degree;
    unsigned coeffs; // interior polynomial coefficient bits a_1..a_{s-1}
    std::array<std::uint32_t, 7> m;
};

inline constexpr std::array<SobolRow, 20> kJoeKuoRows{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

inline constexpr unsigned kSobolBits = 32;
inline constexpr std::size_t kSobolMaxDimension = kJoeKuoRows.size() + 1;

} // namespace detail

// Gray-code Sobol sequence over [0,1)^d. The all-zeros point at index 0 is
// skipped; the first emitted point is (0.5, ..., 0.5).
class SobolSequence {
public:
    explicit SobolSequence(std::size_t dimension)
        : dimension_(dimension), state_(dimension, 0)
    {
        if (dimension < 1 || dimension > detail::kSobolMaxDimension)
            throw std::invalid_argument("SobolSequence: unsupported dimension " +
                                        std::to_string(dimension) + " (table holds 1.." +
                                        std::to_string(detail::kSobolMaxDimension) + ")");
        directions_.resize(dimension);
        for (std::size_t j = 0; j < dimension; ++j)
            init_directions(j);
    }

    std::size_t dimension() const { return dimension_; }
    std::uint64_t index() const { return index_; }

    std::vector<double> next_point()
    {
        // Antonov-Saleev: flip the direction number of the rightmost zero bit
        // of the running index.
        const unsigned c = static_cast<unsigned>(std::countr_one(index_));
        if (c >= detail::kSobolBits)
            throw std::overflow_error("SobolSequence exhausted");
        std::vector<double> point(dimension_);
        for (std::size_t j = 0; j < dimension_; ++j) {
            state_[j] ^= directions_[j][c];
            point[j] = static_cast<double>(state_[j]) * 0x1.0p-32;
        }
        ++index_;
        return point;
    }

private:
    void init_directions(std::size_t j)
    {
        auto& v = directions_[j];
        v.assign(detail::kSobolBits, 0);
        if (j == 0) {
            for (unsigned k = 0; k < detail::kSobolBits; ++k)
                v[k] = 1u << (detail::kSobolBits - 1 - k);
            return;
        }
        const auto& row = detail::kJoeKuoRows[j - 1];
        const unsigned s = row.degree;
        std::vector<std::uint32_t> m(detail::kSobolBits);
        for (unsigned k = 0; k < s; ++k)
            m[k] = row.m[k];
        for (unsigned k = s; k < detail::kSobolBits; ++k) {
            std::uint32_t value = m[k - s] ^ (m[k - s] << s);
            for (unsigned i = 1; i < s; ++i)
                if ((row.coeffs >> (s - 1 - i)) & 1u)
                    value ^= m[k - i] << i;
            m[k] = value;
        }
        for (unsigned k = 0; k < detail::kSobolBits; ++k)
            v[k] = m[k] << (detail::kSobolBits - 1 - k);
    }

    std::size_t dimension_;
    std::uint64_t index_ = 0; // points emitted so far
    std::vector<std::uint32_t> state_;
    std::vector<std::vector<std::uint32_t>> directions_;
};

// Draws n consecutive points and maps them onto the parameter box.
inline std::vector<ParameterVector> sample_sobol(const ParameterSpace& space, std::size_t n,
                                                 SobolSequence& seq)
{
    space.require_dimension(seq.dimension(), "sample_sobol");
    if (n < 1) throw std::invalid_argument("sample_sobol: n must be >= 1");
    std::vector<ParameterVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto raw = seq.next_point();
        ParameterVector v(raw.size());
        for (std::size_t j = 0; j < raw.size(); ++j) {
            const auto& spec = space.specs[j];
            double x = spec.lower + raw[j] * spec.range();
            if (spec.kind == ParamKind::integer_days) x = static_cast<double>(std::llround(x));
            v[j] = x;
        }
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace abmcal
