#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "abmcal/random.hpp"
#include "abmcal/sobol.hpp"

using namespace abmcal;

namespace {

std::string data_dir()
{
    const char* dir = std::getenv("ABMCAL_DATA_DIR");
    REQUIRE(dir != nullptr);
    return dir;
}

// Star discrepancy estimate on an m x m grid of anchored boxes.
double star_discrepancy_2d(const std::vector<std::vector<double>>& points, int m)
{
    double worst = 0.0;
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const double a = static_cast<double>(i) / m;
            const double b = static_cast<double>(j) / m;
            std::size_t inside = 0;
            for (const auto& p : points)
                if (p[0] < a && p[1] < b) ++inside;
            const double frac = static_cast<double>(inside) / static_cast<double>(points.size());
            worst = std::max(worst, std::abs(frac - a * b));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("first points of the 1D sequence match the published values")
{
    SobolSequence seq(1);
    const std::vector<double> expected{0.5,    0.75,   0.25,   0.375,  0.875,  0.625,
                                       0.125,  0.1875, 0.6875, 0.9375, 0.4375, 0.3125,
                                       0.8125, 0.5625, 0.0625, 0.09375};
    for (double e : expected) CHECK(seq.next_point()[0] == e);
}

TEST_CASE("the full 21-dimensional stream matches an independent reference")
{
    std::ifstream in(data_dir() + "/sobol_reference_21d.csv");
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line)); // header

    SobolSequence seq(21);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<double> point = seq.next_point();
        std::istringstream fields(line);
        std::string field;
        std::size_t col = 0;
        while (std::getline(fields, field, ',')) {
            REQUIRE(col < point.size());
            CHECK(point[col] == std::stod(field));
            ++col;
        }
        REQUIRE(col == 21);
        ++rows;
    }
    CHECK(rows == 511);
}

TEST_CASE("coordinates stay in the half-open unit interval")
{
    SobolSequence seq(7);
    for (int i = 0; i < 4096; ++i)
        for (double x : seq.next_point()) {
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
        }
}

TEST_CASE("two sequences of equal dimension emit identical streams")
{
    SobolSequence a(5), b(5);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_point() == b.next_point());
}

TEST_CASE("unsupported dimensions are rejected")
{
    CHECK_THROWS_AS(SobolSequence(0), std::invalid_argument);
    CHECK_THROWS_AS(SobolSequence(22), std::invalid_argument);
    CHECK_NOTHROW(SobolSequence(21));
}

TEST_CASE("aligned 2^k blocks put one point in each dyadic interval")
{
    // Points with raw indices [2^k, 2^(k+1)) stratify every dyadic interval of
    // width 2^-k, in every coordinate. With the zero point skipped, that block
    // starts at emitted position 2^k - 1.
    for (int k = 1; k <= 8; ++k) {
        SobolSequence seq(7);
        const std::size_t block = std::size_t{1} << k;
        for (std::size_t skip = 0; skip < block - 1; ++skip) seq.next_point();
        std::vector<std::vector<int>> counts(7, std::vector<int>(block, 0));
        for (std::size_t i = 0; i < block; ++i) {
            const std::vector<double> p = seq.next_point();
            for (std::size_t d = 0; d < 7; ++d) {
                const auto cell = static_cast<std::size_t>(p[d] * static_cast<double>(block));
                REQUIRE(cell < block);
                ++counts[d][cell];
            }
        }
        for (std::size_t d = 0; d < 7; ++d)
            for (std::size_t c = 0; c < block; ++c) CHECK(counts[d][c] == 1);
    }
}

TEST_CASE("256 sobol points beat random sets on 2D star discrepancy")
{
    SobolSequence seq(2);
    std::vector<std::vector<double>> sobol_points;
    for (int i = 0; i < 256; ++i) sobol_points.push_back(seq.next_point());
    const double sobol_disc = star_discrepancy_2d(sobol_points, 64);

    Rng rng(123);
    double random_total = 0.0;
    for (int set = 0; set < 20; ++set) {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 256; ++i) pts.push_back({uniform01(rng), uniform01(rng)});
        random_total += star_discrepancy_2d(pts, 64);
    }
    const double random_mean = random_total / 20.0;

    INFO("sobol " << sobol_disc << " vs random mean " << random_mean);
    CHECK(sobol_disc < random_mean);
}

TEST_CASE("sample_sobol maps points onto the parameter box")
{
    const ParameterSpace space = default_space();
    SobolSequence seq(7);
    const auto samples = sample_sobol(space, 200, seq);
    REQUIRE(samples.size() == 200);
    for (const auto& v : samples) REQUIRE(contains(space, v));

    // First point is the all-halves point mapped per coordinate.
    CHECK(samples[0][0] == 0.5);
    CHECK(samples[0][3] == 21.0); // 20.5 rounds up for whole-day coordinates
    CHECK_THAT(samples[0][6], Catch::Matchers::WithinAbs(0.011, 1e-15));

    SobolSequence other(7);
    CHECK_THROWS_AS(sample_sobol(ParameterSpace{{{"x", 0.0, 1.0, ParamKind::continuous}}}, 1, other),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_sobol(space, 0, other), std::invalid_argument);
}
