#include "nli/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "nli/errors.hpp"
#include "nli/quadrature.hpp"

namespace nli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const Family& family, int dimension) {
    if (dimension < 1) throw InvalidArgument("dimension N must be a positive integer");
    std::visit(
        Overloaded{
            [&](const PowerLaw& f) {
                if (!(f.r > -dimension && f.r < f.a)) {
                    std::ostringstream msg;
                    msg << "power law requires -N < r < a, got a=" << f.a << " r=" << f.r
                        << " N=" << dimension;
                    throw InvalidArgument(msg.str());
                }
                if (f.a == 0.0 || f.r == 0.0)
                    throw InvalidArgument("power law exponents must be nonzero");
            },
            [](const Morse& f) {
                if (!(f.G >= 0.0)) throw InvalidArgument("Morse potential requires G >= 0");
                if (!(f.L > 0.0)) throw InvalidArgument("Morse potential requires L > 0");
            },
            [](const GaussianMix& f) {
                for (const auto& t : f.terms) {
                    if (!(t.width > 0.0)) throw InvalidArgument("Gaussian widths must be positive");
                    if (!std::isfinite(t.amplitude))
                        throw InvalidArgument("Gaussian amplitudes must be finite");
                }
            },
            [](const Tabulated& f) {
                if (f.knots.empty()) throw InvalidArgument("tabulated potential needs knots");
                for (std::size_t i = 0; i < f.knots.size(); ++i) {
                    if (!(f.knots[i].radius >= 0.0) || !std::isfinite(f.knots[i].value))
                        throw InvalidArgument("tabulated knots need radius >= 0 and finite values");
                    if (i > 0 && !(f.knots[i].radius > f.knots[i - 1].radius))
                        throw InvalidArgument("tabulated knot radii must be strictly increasing");
                }
            },
            [](const Power& f) {
                if (!(f.exponent > 0.0)) throw InvalidArgument("power exponent must be positive");
                if (!std::isfinite(f.coefficient))
                    throw InvalidArgument("power coefficient must be finite");
            },
        },
        family);
}

double tabulated_value(const Tabulated& t, double radius) {
    const auto& k = t.knots;
    if (radius <= k.front().radius) return k.front().value;
    if (radius > k.back().radius) return 0.0;
    auto hi = std::lower_bound(k.begin(), k.end(), radius,
                               [](const Knot& knot, double r) { return knot.radius < r; });
    if (hi->radius == radius) return hi->value;
    auto lo = hi - 1;
    const double s = (radius - lo->radius) / (hi->radius - lo->radius);
    return lo->value + s * (hi->value - lo->value);
}

// Largest radius in a log grid where |W| exceeds threshold.
double decay_radius(const RadialPotential& p, double relative) {
    constexpr int kPoints = 2000;
    const double lo = -3.0, hi = 15.0;
    std::vector<double> radii(kPoints), values(kPoints);
    double scale = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        radii[i] = std::pow(10.0, lo + (hi - lo) * i / (kPoints - 1));
        values[i] = p(radii[i]);
        if (std::isfinite(values[i])) scale = std::max(scale, std::abs(values[i]));
    }
    if (scale == 0.0) return 0.0;
    const double threshold = relative * scale;
    for (int i = kPoints - 1; i >= 0; --i)
        if (std::abs(values[i]) > threshold)
            return i + 1 < kPoints ? radii[i + 1] : kInf;
    return radii[0];
}

}  // namespace

std::string to_string(TailClass c) {
    switch (c) {
        case TailClass::H3a: return "H3a";
        case TailClass::H3b: return "H3b";
        case TailClass::Neither: return "neither";
    }
    return "neither";
}

std::string to_string(H1Status s) {
    return s == H1Status::HoldsByConstruction ? "holds-by-construction" : "not-checked";
}

std::string to_string(H2Status s) {
    switch (s) {
        case H2Status::Holds: return "holds";
        case H2Status::Fails: return "fails";
        case H2Status::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

double sphere_area(int dimension) {
    const double half = 0.5 * dimension;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double ball_volume(int dimension) {
    const double half = 0.5 * dimension;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

RadialPotential::RadialPotential(Family family, int dimension)
    : family_(std::move(family)), dimension_(dimension) {
    validate(family_, dimension_);
}

double RadialPotential::operator()(double radius) const {
    return std::visit(
        Overloaded{
            [&](const PowerLaw& f) {
                if (radius == 0.0) return f.r < 0.0 ? kInf : 0.0;
                return std::pow(radius, f.a) / f.a - std::pow(radius, f.r) / f.r;
            },
            [&](const Morse& f) { return std::exp(-radius) - f.G * std::exp(-radius / f.L); },
            [&](const GaussianMix& f) {
                double sum = 0.0;
                for (const auto& t : f.terms) {
                    const double u = radius / t.width;
                    sum += t.amplitude * std::exp(-u * u);
                }
                return sum;
            },
            [&](const Tabulated& f) { return tabulated_value(f, radius); },
            [&](const Power& f) { return f.coefficient * std::pow(radius, f.exponent); },
        },
        family_);
}

double RadialPotential::derivative(double radius) const {
    return std::visit(
        Overloaded{
            [&](const PowerLaw& f) {
                return std::pow(radius, f.a - 1.0) - std::pow(radius, f.r - 1.0);
            },
            [&](const Morse& f) {
                return -std::exp(-radius) + f.G / f.L * std::exp(-radius / f.L);
            },
            [&](const GaussianMix& f) {
                double sum = 0.0;
                for (const auto& t : f.terms) {
                    const double u = radius / t.width;
                    sum -= 2.0 * t.amplitude * u / t.width * std::exp(-u * u);
                }
                return sum;
            },
            [&](const Tabulated&) -> double {
                throw NonDifferentiable("tabulated potentials have no derivative model");
            },
            [&](const Power& f) {
                return f.coefficient * f.exponent * std::pow(radius, f.exponent - 1.0);
            },
        },
        family_);
}

bool RadialPotential::differentiable() const noexcept {
    return !std::holds_alternative<Tabulated>(family_);
}

bool RadialPotential::singular_at_origin() const noexcept { return std::isinf(value_at_zero()); }

std::optional<TailClass> RadialPotential::analytic_tail_class() const {
    return std::visit(
        Overloaded{
            [](const PowerLaw& f) -> std::optional<TailClass> {
                return f.a > 0.0 ? TailClass::H3a : TailClass::H3b;
            },
            [](const Morse&) -> std::optional<TailClass> { return TailClass::H3b; },
            [](const GaussianMix&) -> std::optional<TailClass> { return TailClass::H3b; },
            [](const Tabulated&) -> std::optional<TailClass> { return std::nullopt; },
            [](const Power& f) -> std::optional<TailClass> {
                if (f.coefficient > 0.0) return TailClass::H3a;
                if (f.coefficient == 0.0) return TailClass::H3b;
                return TailClass::Neither;
            },
        },
        family_);
}

double RadialPotential::length_scale() const {
    return std::visit(
        Overloaded{
            [](const PowerLaw&) { return 1.0; },
            [](const Morse& f) { return std::min(1.0, f.L); },
            [](const GaussianMix& f) {
                double s = kInf;
                for (const auto& t : f.terms) s = std::min(s, t.width);
                return std::isinf(s) ? 1.0 : s;
            },
            [](const Tabulated& f) {
                const double span = f.knots.back().radius;
                return span > 0.0 ? span / 10.0 : 1.0;
            },
            [](const Power&) { return 1.0; },
        },
        family_);
}

double RadialPotential::interaction_range() const {
    const auto tail = analytic_tail_class();
    if (tail && *tail != TailClass::H3b) return kInf;
    if (const auto* t = std::get_if<Tabulated>(&family_)) return t->knots.back().radius;
    return decay_radius(*this, 1e-12);
}

std::vector<double> RadialPotential::breakpoints() const {
    std::vector<double> out;
    if (const auto* t = std::get_if<Tabulated>(&family_))
        for (const auto& k : t->knots) out.push_back(k.radius);
    return out;
}

double RadialPotential::support_end() const {
    if (const auto* t = std::get_if<Tabulated>(&family_)) return t->knots.back().radius;
    if (const auto* g = std::get_if<GaussianMix>(&family_); g && g->terms.empty()) return 0.0;
    return kInf;
}

std::string RadialPotential::family_name() const {
    return std::visit(Overloaded{
                          [](const PowerLaw&) { return std::string("powerlaw"); },
                          [](const Morse&) { return std::string("morse"); },
                          [](const GaussianMix&) { return std::string("gaussmix"); },
                          [](const Tabulated&) { return std::string("tabulated"); },
                          [](const Power&) { return std::string("power"); },
                      },
                      family_);
}

std::string RadialPotential::describe() const {
    std::ostringstream out;
    out.precision(17);
    std::visit(Overloaded{
                   [&](const PowerLaw& f) { out << "powerlaw(a=" << f.a << ",r=" << f.r; },
                   [&](const Morse& f) { out << "morse(G=" << f.G << ",L=" << f.L; },
                   [&](const GaussianMix& f) {
                       out << "gaussmix(";
                       for (const auto& t : f.terms)
                           out << "[" << t.amplitude << "," << t.width << "]";
                       out << ",";
                   },
                   [&](const Tabulated& f) { out << "tabulated(knots=" << f.knots.size(); },
                   [&](const Power& f) {
                       out << "power(c=" << f.coefficient << ",e=" << f.exponent;
                   },
               },
               family_);
    out << ",N=" << dimension_ << ")";
    return out.str();
}

TailClass tail_class(const RadialPotential& p) {
    if (auto c = p.analytic_tail_class()) return *c;
    return probe_hypotheses(p, 1e-8).h3_class;
}

Infimum infimum_estimate(const RadialPotential& p) {
    constexpr int kPoints = 10000;
    const double lo = -8.0, hi = 8.0;
    std::vector<double> radii(kPoints), values(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        radii[i] = std::pow(10.0, lo + (hi - lo) * i / (kPoints - 1));
        values[i] = p(radii[i]);
    }
    Infimum best{kInf, 0.0};
    const double at_zero = p(0.0);
    if (std::isfinite(at_zero)) best = {at_zero, 0.0};

    for (int i = 0; i < kPoints; ++i) {
        const bool left_ok = i == 0 || values[i] <= values[i - 1];
        const bool right_ok = i + 1 == kPoints || values[i] <= values[i + 1];
        if (values[i] < best.value) best = {values[i], radii[i]};
        if (!left_ok || !right_ok) continue;
        if (i > 0 && i + 1 < kPoints && values[i] == values[i - 1] && values[i] == values[i + 1])
            continue;
        const double a = i == 0 ? 0.0 : radii[i - 1];
        const double b = i + 1 == kPoints ? radii[i] : radii[i + 1];
        if (!(b > a)) continue;
        auto [r, v] = boost::math::tools::brent_find_minima(
            [&](double x) { return p(x); }, a, b, std::numeric_limits<double>::digits / 2);
        if (v < best.value) best = {v, r};
    }
    return best;
}

HypothesisReport probe_hypotheses(const RadialPotential& p, double quad_tol) {
    if (!(quad_tol > 0.0)) throw InvalidArgument("quad_tol must be positive");
    HypothesisReport report;
    const int n = p.dimension();
    const double area = sphere_area(n);

    // Local integrability: partial integrals over [10^{-k}, 1] decade by
    // decade; divergence when the last decade adds more than 10%.
    auto integrand = [&](double r) { return std::abs(p(r)) * std::pow(r, n - 1); };
    const auto knots = p.breakpoints();
    double partial = 0.0;
    double last_increment = 0.0, previous_increment = 0.0;
    bool finite = true;
    for (int k = 1; k <= 10; ++k) {
        const double a = std::pow(10.0, -k), b = std::pow(10.0, 1 - k);
        double inc = 0.0;
        std::vector<double> nodes{a};
        for (double x : knots)
            if (x > a && x < b) nodes.push_back(x);
        nodes.push_back(b);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            inc += quad::integrate(integrand, nodes[i], nodes[i + 1], quad_tol).value;
        inc *= area;
        if (!std::isfinite(inc)) finite = false;
        partial += inc;
        previous_increment = last_increment;
        last_increment = inc;
        if (k >= 2) report.h2_cutoff_estimates.push_back(partial);
    }
    const double previous = partial - last_increment;
    if (!finite) {
        report.h2_locally_integrable = H2Status::Inconclusive;
        report.h2_value = kInf;
    } else if (previous > 0.0 && last_increment > 0.1 * previous) {
        report.h2_locally_integrable = H2Status::Fails;
        report.h2_value = kInf;
    } else {
        report.h2_locally_integrable = H2Status::Holds;
        // Geometric extrapolation of the remaining decades below 1e-10.
        double tail = 0.0;
        if (previous_increment > 0.0 && last_increment < previous_increment) {
            const double q = last_increment / previous_increment;
            tail = last_increment * q / (1.0 - q);
        }
        report.h2_value = partial + tail;
    }

    for (int k = 2; k <= 6; ++k) {
        const double r = std::pow(10.0, k);
        report.h3_probes.push_back({r, p(r)});
    }
    if (auto analytic = p.analytic_tail_class()) {
        report.h3_class = *analytic;
    } else {
        const auto& probes = report.h3_probes;
        const bool small = std::all_of(probes.begin(), probes.end(),
                                       [](const TailProbe& t) { return std::abs(t.value) < 1e-8; });
        bool growing = true;
        for (std::size_t i = 2; i < probes.size(); ++i)
            growing = growing && probes[i].value > probes[i - 1].value;
        report.h3_class = small ? TailClass::H3b : growing ? TailClass::H3a : TailClass::Neither;
    }

    const Infimum inf = infimum_estimate(p);
    report.c_w = inf.value;
    report.c_w_radius = inf.radius;
    return report;
}

}  // namespace nli
