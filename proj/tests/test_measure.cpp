#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nli/errors.hpp"
#include "nli/measure.hpp"

using namespace nli;

namespace {

// Brute-force 1-D check over closed intervals with endpoints on atoms.
bool lp_holds_1d(const PointCloud& mu, const PointCloud& nu, double eps) {
    std::vector<double> ends;
    for (std::size_t i = 0; i < mu.size(); ++i) ends.push_back(mu.point(i)[0]);
    for (std::size_t i = 0; i < nu.size(); ++i) ends.push_back(nu.point(i)[0]);
    auto mass = [](const PointCloud& m, double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.point(i)[0] >= a && m.point(i)[0] <= b) s += m.weight(i);
        return s;
    };
    const double slack = 1e-12;
    for (double a : ends)
        for (double b : ends) {
            if (b < a) continue;
            if (mass(mu, a, b) > mass(nu, a - eps - slack, b + eps + slack) + eps + slack) return false;
            if (mass(nu, a, b) > mass(mu, a - eps - slack, b + eps + slack) + eps + slack) return false;
        }
    return true;
}

double lp_oracle_1d(const PointCloud& mu, const PointCloud& nu, const std::vector<double>& grid) {
    for (double e : grid)
        if (lp_holds_1d(mu, nu, e)) return e;
    return std::numeric_limits<double>::infinity();
}

std::vector<double> dense_grid(double lo, double hi, int count) {
    std::vector<double> g;
    for (int k = 0; k < count; ++k) g.push_back(lo + (hi - lo) * k / (count - 1));
    return g;
}

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("point cloud invariants") {
    CHECK_THROWS_AS(PointCloud(1, {0.0, 1.0}, {0.5, -0.5}), InvalidArgument);
    CHECK_THROWS_AS(PointCloud(2, {0.0, 1.0, 2.0}, {1.0}), InvalidArgument);
    const auto e = PointCloud::empirical(1, {0.0, 1.0, 2.0});
    CHECK(e.is_probability());
    CHECK(e.has_distinct_points());
    CHECK_FALSE(PointCloud(1, {0.0, 0.0}, {0.5, 0.5}).has_distinct_points());
    CHECK((e + e).total_mass() == doctest::Approx(2.0));
}

TEST_CASE("Levy-Prokhorov examples") {
    const PointCloud d0(1, {0.0}, {1.0});
    const PointCloud d03(1, {0.3}, {1.0});
    CHECK(levy_prokhorov_upper(d0, d0, {0.05, 0.1}) == 0.05);
    CHECK(levy_prokhorov_upper(d0, d03, {0.1, 0.2, 0.3, 0.4}) == 0.3);
    const PointCloud mix(1, {0.0, 1.0}, {0.5, 0.5});
    const auto grid = dense_grid(0.01, 1.0, 100);
    CHECK(levy_prokhorov_upper(d0, mix, grid) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::isinf(levy_prokhorov_upper(d0, PointCloud(1, {5.0}, {1.0}), {0.1, 0.2})));
    CHECK_THROWS_AS(levy_prokhorov_upper(PointCloud(3, {0, 0, 0}, {1.0}), PointCloud(3, {0, 0, 0}, {1.0}), {0.1}),
                    DimensionUnsupported);
}

TEST_CASE("Levy-Prokhorov agrees with a brute-force interval oracle in 1-D") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = dense_grid(0.02, 1.0, 50);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> a, b;
        for (int k = 0; k < 4 + trial % 3; ++k) a.push_back(u(rng));
        for (int k = 0; k < 3 + trial % 4; ++k) b.push_back(u(rng));
        const auto mu = PointCloud::empirical(1, a);
        const auto nu = PointCloud::empirical(1, b);
        CHECK(levy_prokhorov_upper(mu, nu, grid) == lp_oracle_1d(mu, nu, grid));
    }
}

TEST_CASE("empirical approximation of the uniform density on [0,1]") {
    const GridDensity target(1, {0.0}, 0.01, {100}, std::vector<double>(100, 1.0));
    const auto approx = empirical_approximation(target, 0.2, 10, 3);
    CHECK(approx.n >= 10);
    CHECK(approx.measure.size() == approx.n);
    CHECK(approx.measure.is_probability());
    CHECK(approx.measure.has_distinct_points());
    CHECK(approx.placed_in_cubes >= (1.0 - 0.2) * static_cast<double>(approx.n));
    const auto raster = target.to_point_cloud(4);
    CHECK(levy_prokhorov_upper(raster, approx.measure, {0.05, 0.1, 0.15, 0.2}) <= 0.2);
    CHECK(lp_oracle_1d(raster, approx.measure, {0.2}) == 0.2);
}

TEST_CASE("empirical approximation of a concentrated density") {
    std::vector<double> v(11, 0.0);
    v[5] = 1.0;
    const GridDensity target(1, {-0.55}, 0.1, {11}, v);
    const auto approx = empirical_approximation(target.normalized(), 0.4, 4, 1);
    std::size_t in_cell = 0;
    for (std::size_t i = 0; i < approx.measure.size(); ++i) {
        const double x = approx.measure.point(i)[0];
        if (x >= -0.05 && x < 0.05) ++in_cell;
    }
    CHECK(in_cell == approx.placed_in_cubes);
    CHECK(approx.placed_in_cubes + approx.padding == approx.n);
}

TEST_CASE("empirical approximation of a two-cell mixture") {
    const GridDensity target(1, {0.0}, 1.0, {3}, {0.5, 0.0, 0.5});
    const auto approx = empirical_approximation(target, 0.1, 100, 5);
    CHECK(approx.n >= 100);
    // Each cube of [-R, R] holds floor(p_i n) points, p_i being the exact
    // overlap of the cube with the two cells.
    const double R = approx.cube_radius;
    const double w = 2 * R / approx.cubes_per_axis;
    auto overlap = [](double a, double b, double c, double d) { return std::max(0.0, std::min(b, d) - std::max(a, c)); };
    std::size_t placed = 0;
    for (const auto& [cube, count] : approx.cube_counts) {
        const double a = -R + w * static_cast<double>(cube), b = a + w;
        const double p = 0.5 * overlap(a, b, 0.0, 1.0) + 0.5 * overlap(a, b, 2.0, 3.0);
        CHECK(std::abs(static_cast<double>(count) - std::floor(p * static_cast<double>(approx.n))) <= 1.0);
        placed += count;
    }
    CHECK(placed == approx.placed_in_cubes);
    CHECK(static_cast<double>(placed) >= 0.9 * static_cast<double>(approx.n));
}

TEST_CASE("empirical approximation is deterministic in the seed") {
    const GridDensity target(2, {-1.0, -1.0}, 0.5, {4, 4}, std::vector<double>(16, 0.25));
    const auto a = empirical_approximation(target, 0.2, 20, 9);
    const auto b = empirical_approximation(target, 0.2, 20, 9);
    CHECK(a.measure.coordinates() == b.measure.coordinates());
    CHECK_THROWS_AS(empirical_approximation(target, 0.6, 20, 9), InvalidArgument);
}

TEST_CASE("vanishing ball sequence") {
    const auto r1 = vanishing_ball_sequence(1, 1, 200);
    CHECK(r1.mass() == doctest::Approx(1.0).epsilon(1e-12));
    double peak = 0.0;
    for (double v : r1.values()) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(0.5).epsilon(0.02));

    const auto r4 = vanishing_ball_sequence(4, 2, 60);
    CHECK(r4.mass() == doctest::Approx(1.0).epsilon(1e-12));
    peak = 0.0;
    for (double v : r4.values()) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0 / (16.0 * M_PI)).epsilon(0.02));
}

TEST_CASE("Gaussian witness densities") {
    const auto g1 = gaussian_witness_density(1.0, 1, 20, 10.0);
    CHECK(g1.mass() == doctest::Approx(1.0).epsilon(1e-12));
    const auto g2 = gaussian_witness_density(1.0, 2, 20, 10.0);
    CHECK(std::abs(g2.mass() - 1.0) <= 1e-6);
    const auto h = gaussian_witness_density(2.0, 1, 20, 10.0);
    CHECK(h.second_moment() / g1.second_moment() == doctest::Approx(0.25).epsilon(1e-9));
    // Variance of exp(-2 p^2 x^2) is 1 / (4 p^2).
    CHECK(g1.second_moment() == doctest::Approx(0.25).epsilon(1e-3));
}

}
