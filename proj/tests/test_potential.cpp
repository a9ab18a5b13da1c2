#include <doctest.h>

#include <cmath>
#include <limits>

#include "nli/errors.hpp"
#include "nli/potential.hpp"

using namespace nli;

TEST_SUITE("potential") {

TEST_CASE("closed-form evaluations") {
    CHECK(RadialPotential(PowerLaw{2.0, 1.0}, 1)(1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(RadialPotential(Morse{1.0, 1.0}, 1)(0.0) == 0.0);
    CHECK(std::isinf(RadialPotential(PowerLaw{2.0, -1.0}, 2)(0.0)));
    CHECK(RadialPotential(PowerLaw{2.0, -1.0}, 2)(0.0) > 0.0);
    CHECK_THROWS_AS(RadialPotential(PowerLaw{2.0, 0.0}, 1), InvalidArgument);
    CHECK(RadialPotential(GaussianMix{{{1.0, 1.0}, {-0.5, 2.0}}}, 1)(1.0) ==
          doctest::Approx(std::exp(-1.0) - 0.5 * std::exp(-0.25)).epsilon(1e-15));
}

TEST_CASE("admissible power-law range is enforced") {
    CHECK_THROWS_AS(RadialPotential(PowerLaw{2.0, -3.0}, 2), InvalidArgument);
    CHECK_THROWS_AS(RadialPotential(PowerLaw{1.0, 2.0}, 2), InvalidArgument);
    CHECK_THROWS_AS(RadialPotential(Morse{-1.0, 1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(RadialPotential(Morse{1.0, 0.0}, 1), InvalidArgument);
    CHECK_NOTHROW(RadialPotential(PowerLaw{2.0, -2.9}, 3));
}

TEST_CASE("tabulated profile interpolates and vanishes past the last knot") {
    RadialPotential p(Tabulated{{{0.0, -1.0}, {1.0, 1.0}, {2.0, 0.0}}}, 1);
    CHECK(p(0.5) == doctest::Approx(0.0));
    CHECK(p(1.5) == doctest::Approx(0.5));
    CHECK(p(3.0) == 0.0);
    CHECK_FALSE(p.differentiable());
    CHECK_THROWS_AS(RadialPotential(Tabulated{{{1.0, 0.0}, {1.0, 1.0}}}, 1), InvalidArgument);
}

TEST_CASE("analytic derivatives against central differences") {
    const RadialPotential ps[] = {RadialPotential(PowerLaw{2.0, 1.0}, 1), RadialPotential(PowerLaw{4.0, -0.5}, 2),
                                  RadialPotential(Morse{2.0, 0.7}, 3),
                                  RadialPotential(GaussianMix{{{1.0, 1.0}, {-2.0, 0.3}}}, 1),
                                  RadialPotential(Power{1.5, 3.0}, 2)};
    for (const auto& p : ps)
        for (double r : {0.3, 0.9, 1.7, 3.1}) {
            const double h = 1e-6;
            const double fd = (p(r + h) - p(r - h)) / (2 * h);
            CHECK(p.derivative(r) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("probe_hypotheses: PowerLaw(2,-1), N=3") {
    const auto rep = probe_hypotheses(RadialPotential(PowerLaw{2.0, -1.0}, 3), 1e-8);
    CHECK(rep.h2_locally_integrable == H2Status::Holds);
    CHECK(rep.h3_class == TailClass::H3a);
    // 4 pi int_0^1 |r^2/2 + 1/r| r^2 dr = 4 pi (1/10 + 1/2)
    CHECK(rep.h2_value == doctest::Approx(4 * M_PI * 0.6).epsilon(1e-6));
}

TEST_CASE("probe_hypotheses: tabulated r^-3 profile in N=2 fails (H2)") {
    Tabulated t;
    for (int k = -40; k <= 0; ++k) {
        const double r = std::pow(10.0, k / 4.0);
        t.knots.push_back({r, std::pow(r, -3.0)});
    }
    const auto rep = probe_hypotheses(RadialPotential(t, 2), 1e-8);
    CHECK(rep.h2_locally_integrable == H2Status::Fails);
}

TEST_CASE("probe_hypotheses: Morse(2,1), N=1") {
    const auto rep = probe_hypotheses(RadialPotential(Morse{2.0, 1.0}, 1), 1e-8);
    CHECK(rep.h3_class == TailClass::H3b);
    CHECK(rep.c_w == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rep.c_w_radius == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rep.h1_lsc == H1Status::HoldsByConstruction);
}

TEST_CASE("tail class rules") {
    for (double a : {1.5, 2.0, 4.0})
        for (double r : {0.5, 1.0})
            if (a > r) CHECK(tail_class(RadialPotential(PowerLaw{a, r}, 2)) == TailClass::H3a);
    CHECK(tail_class(RadialPotential(Morse{0.3, 3.0}, 2)) == TailClass::H3b);
    CHECK(tail_class(RadialPotential(GaussianMix{{{-1.0, 5.0}}}, 1)) == TailClass::H3b);
}

TEST_CASE("h2 verdict follows the analytic rule r > -N") {
    for (int N = 1; N <= 3; ++N)
        for (double r : {-0.9 * N, -0.5, 0.5})
            CHECK(probe_hypotheses(RadialPotential(PowerLaw{2.0, r}, N), 1e-8).h2_locally_integrable ==
                  H2Status::Holds);
}

TEST_CASE("C_W is below every sampled value") {
    const RadialPotential p(Morse{3.0, 0.5}, 2);
    const auto rep = probe_hypotheses(p, 1e-8);
    for (int k = 0; k < 2000; ++k) {
        const double r = 1e-3 * std::pow(1.01, k);
        CHECK(rep.c_w <= p(r) + 1e-9);
    }
}

TEST_CASE("sphere areas") {
    CHECK(sphere_area(1) == doctest::Approx(2.0));
    CHECK(sphere_area(2) == doctest::Approx(2 * M_PI));
    CHECK(sphere_area(3) == doctest::Approx(4 * M_PI));
    CHECK(ball_volume(2) == doctest::Approx(M_PI));
}

}
