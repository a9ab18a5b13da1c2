#include <doctest.h>

#include <cmath>
#include <variant>

#include "nli/energy.hpp"
#include "nli/errors.hpp"
#include "nli/stability.hpp"

using namespace nli;

namespace {

// Recomputes a certificate's energy independently of the criterion.
double recheck(const RadialPotential& p, const StabilityVerdict& v) {
    if (const auto* g = std::get_if<GridDensity>(&v.certificate))
        return energy_grid(p, *g, GridQuadrature::RadialFast, {512, 0x1234}).value;
    if (const auto* c = std::get_if<PointCloud>(&v.certificate)) return energy_pointcloud(p, *c).value;
    return NAN;
}

RadialPotential gauss(double amplitude, int dim) { return RadialPotential(GaussianMix{{{amplitude, 1.0}}}, dim); }

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("integral criterion closed forms") {
    const RadialPotential m(Morse{1.0, 2.0}, 2);
    const auto v = integral_criterion(m);
    CHECK(v.numeric_value == doctest::Approx(-6 * M_PI).epsilon(1e-8));
    CHECK(v.outcome == Outcome::HESatisfied);
    REQUIRE(v.certificate_energy);
    CHECK(v.certificate_energy->value < 0.0);
    CHECK(recheck(m, v) < 0.0);

    for (int N = 1; N <= 3; ++N) {
        const auto b = integral_criterion(RadialPotential(Morse{1.0, 1.0}, N));
        CHECK(std::abs(b.numeric_value) < 1e-8);
        CHECK(b.outcome == Outcome::Inconclusive);
    }
    const auto g = integral_criterion(gauss(1.0, 1));
    CHECK(g.numeric_value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));
    CHECK(g.outcome == Outcome::StableIndication);

    CHECK_THROWS_AS(integral_criterion(RadialPotential(PowerLaw{2.0, 1.0}, 1)), PreconditionViolated);
}

TEST_CASE("Gaussian-weighted integrals") {
    const auto p = gauss(-1.0, 1);
    for (double q : {0.0, 0.1, 1.0, 7.0})
        CHECK(gaussian_weighted_integral(p, q, 1e-10) ==
              doctest::Approx(-std::sqrt(M_PI / (1 + q * q))).epsilon(1e-9));
    const auto v = gaussian_criterion(p, default_p_grid());
    CHECK(v.outcome == Outcome::HESatisfied);
    CHECK(recheck(p, v) < 0.0);

    const auto pos = gaussian_criterion(RadialPotential(GaussianMix{{{1.0, 1.0}, {0.5, 3.0}}}, 2), default_p_grid());
    CHECK(pos.outcome == Outcome::StableIndication);
    CHECK(pos.numeric_value > 0.0);
}

TEST_CASE("Gaussian criterion reproduces the integral as p -> 0") {
    const RadialPotential m(Morse{0.5, 1.5}, 2);
    CHECK(gaussian_weighted_integral(m, 1e-5, 1e-10) ==
          doctest::Approx(integral_criterion(m).numeric_value).epsilon(1e-8));
}

TEST_CASE("Gaussian criterion on an (H3a) power law is advisory and certificate-backed") {
    const RadialPotential p(PowerLaw{2.0, 1.0}, 1);
    const auto v = gaussian_criterion(p, default_p_grid());
    CHECK(v.advisory);
    if (v.outcome == Outcome::HESatisfied) CHECK(recheck(p, v) < 0.0);
}

TEST_CASE("radial Fourier transform of a Gaussian") {
    for (int N = 1; N <= 3; ++N) {
        const auto p = gauss(1.0, N);
        for (double xi : {0.0, 0.5, 2.0, 3.0, 6.0}) {
            const double exact = std::pow(M_PI, 0.5 * N) * std::exp(-xi * xi / 4);
            CHECK(radial_fourier_transform(p, xi, 1e-10) == doctest::Approx(exact).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(radial_fourier_transform(gauss(1.0, 4), 1.0, 1e-8), DimensionUnsupported);
    CHECK_THROWS_AS(radial_fourier_transform(RadialPotential(PowerLaw{2.0, 1.0}, 1), 1.0, 1e-8),
                    NotSquareIntegrable);
}

TEST_CASE("Fourier criterion verdicts") {
    const auto stable = fourier_criterion(gauss(1.0, 1), default_xi_grid());
    CHECK(stable.outcome == Outcome::StableIndication);

    // w^(0) = sqrt(pi) (1 - 2c) for c = 0.8.
    const RadialPotential two(GaussianMix{{{1.0, 1.0}, {-0.8, 2.0}}}, 1);
    CHECK(radial_fourier_transform(two, 0.0, 1e-10) == doctest::Approx(std::sqrt(M_PI) * (1 - 1.6)).epsilon(1e-8));
    const auto he = fourier_criterion(two, default_xi_grid());
    CHECK(he.outcome == Outcome::HESatisfied);
    CHECK(recheck(two, he) < 0.0);

    CHECK(fourier_criterion(RadialPotential(GaussianMix{}, 1), default_xi_grid()).outcome == Outcome::Inconclusive);
}

TEST_CASE("check_ruc") {
    const auto cfg = PointCloud::empirical(1, {0.0, 0.4, 1.3, 2.0});
    CHECK(check_ruc(gauss(1.0, 1), cfg, 0.0).holds);

    const std::size_t n = 100;
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(1e-6 * static_cast<double>(i));
    const auto collapsed = check_ruc(gauss(-1.0, 1), PointCloud::empirical(1, xs), 1.0);
    CHECK(collapsed.value == doctest::Approx(-(n - 1.0) / (2.0 * n)).epsilon(1e-6));
    CHECK_FALSE(collapsed.holds);

    const auto pair = check_ruc(RadialPotential(Power{-1.0, 1.0}, 1), PointCloud::empirical(1, {0.0, 1.0}), 1.0);
    CHECK(pair.value == doctest::Approx(-0.25));
    CHECK(pair.holds);
}

TEST_CASE("ruc_search") {
    const auto pos = ruc_search(gauss(1.0, 1), {4, 8}, {1}, 300);
    CHECK(pos.outcome == Outcome::StableIndication);
    for (const auto& s : pos.scan) CHECK(s.value >= 0.0);

    const RadialPotential m(Morse{2.0, 1.0}, 1);
    const auto he = ruc_search(m, {4, 8, 16}, {1}, 500);
    CHECK(he.outcome == Outcome::HESatisfied);
    REQUIRE(he.fit_c);
    CHECK(*he.fit_c < -0.01);
    CHECK(recheck(m, he) < 0.0);

    const auto singular = ruc_search(RadialPotential(PowerLaw{2.0, -0.5}, 1), {4, 8}, {1}, 300);
    CHECK(singular.advisory);
}

TEST_CASE("ball witness") {
    const RadialPotential m(Morse{1.0, 2.0}, 2);
    const auto w = ball_witness(m, 20.0, 8);
    CHECK(w.energy.value < 0.0);
    CHECK(energy_grid(m, w.density, GridQuadrature::RadialFast, {512, 99}).value < 0.0);

    CHECK_THROWS_AS(ball_witness(gauss(1.0, 1), 1.0, 1), PreconditionViolated);
    CHECK(ball_witness(gauss(-1.0, 1), 1.0, 1).energy.value < 0.0);
}

}
