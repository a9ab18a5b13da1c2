#include "nli/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/minima.hpp>

#include "nli/errors.hpp"
#include "nli/quadrature.hpp"

namespace nli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Weight = std::function<double(double)>;

// S_{N-1} int_0^inf W(r) g(r) r^{N-1} dr.
quad::HalfLineResult radial_integral(const RadialPotential& p, const Weight& g, double tol,
                                     double inner) {
    const int dim = p.dimension();
    auto f = [&](double r) -> double {
        if (r <= 0.0) return 0.0;
        const double w = p(r);
        if (w == 0.0) return 0.0;
        const double gw = g(r);
        if (gw == 0.0) return 0.0;
        return w * gw * std::pow(r, dim - 1);
    };
    quad::HalfLineOptions o;
    o.breakpoints = p.breakpoints();
    o.support_end = p.support_end();
    o.inner = inner;
    auto r = quad::integrate_half_line(f, tol, o);
    const double s = sphere_area(dim);
    r.value *= s;
    r.error *= s;
    r.l1 *= s;
    return r;
}

double inner_radius(const RadialPotential& p, double weight_p) {
    double inner = std::min(1.0, p.length_scale());
    if (weight_p > 0.0) inner = std::min(inner, 4.0 / weight_p);
    return inner;
}

quad::HalfLineResult plain_integral(const RadialPotential& p, double tol) {
    return radial_integral(p, [](double) { return 1.0; }, tol, inner_radius(p, 0.0));
}

std::size_t axis_cap(int dimension, std::size_t max_cells) {
    auto cap = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(max_cells), 1.0 / dimension) + 1e-9));
    return std::max<std::size_t>(cap, 4);
}

EnergyReport witness_energy(const RadialPotential& p, const GridDensity& rho) {
    return energy_grid(p, rho, GridQuadrature::RadialFast);
}

BallWitness build_ball(const RadialPotential& p, double radius, const StabilityOptions& options) {
    const double ls = p.length_scale();
    const std::size_t cap = axis_cap(p.dimension(), options.max_witness_cells) / 2;
    const double desired = std::ceil(radius / (0.5 * ls));
    const int cpr = static_cast<int>(std::clamp(desired, 2.0, static_cast<double>(cap)));
    BallWitness w;
    w.radius = radius;
    w.density = uniform_ball_density(radius, p.dimension(), cpr);
    w.energy = witness_energy(p, w.density);
    return w;
}

struct GaussianWitness {
    GridDensity density;
    EnergyReport energy;
    double p = 0.0;
};

std::optional<GaussianWitness> build_gaussian(const RadialPotential& rp, double p,
                                              const StabilityOptions& options) {
    const double sigma = 0.5 / p;
    const double radius_sigmas = 6.0;
    const double ls = rp.length_scale();
    const auto cap = static_cast<double>(axis_cap(rp.dimension(), options.max_witness_cells));
    double h = std::min(0.5 * ls, 0.5 * sigma);
    h = std::max(h, 2.0 * radius_sigmas * sigma / cap);
    const int cps = std::max(2, static_cast<int>(std::floor(sigma / h)));
    if (std::pow(2.0 * radius_sigmas * cps, rp.dimension()) > 4.0 * static_cast<double>(options.max_witness_cells))
        return std::nullopt;
    GaussianWitness w;
    w.p = p;
    w.density = gaussian_witness_density(p, rp.dimension(), cps, radius_sigmas);
    w.energy = witness_energy(rp, w.density);
    return w;
}

// Tries the candidates in order and returns the first witness with negative
// energy.
std::optional<GaussianWitness> first_gaussian_witness(const RadialPotential& rp,
                                                      const std::vector<double>& candidates,
                                                      const StabilityOptions& options) {
    for (double p : candidates) {
        try {
            auto w = build_gaussian(rp, p, options);
            if (w && w->energy.value < 0.0) return w;
        } catch (const NumericalError&) {
        }
    }
    return std::nullopt;
}

// p > 0 with negative weighted integral, most negative predicted energy of
// the normalized Gaussian first.
std::vector<double> rank_gaussian_candidates(int dimension, const std::vector<ScanPoint>& scan,
                                             std::size_t limit) {
    std::vector<std::pair<double, double>> ranked;
    for (const auto& s : scan)
        if (s.parameter > 0.0 && s.value < 0.0)
            ranked.emplace_back(std::pow(s.parameter * s.parameter / std::numbers::pi, 0.5 * dimension) * s.value,
                                s.parameter);
    std::stable_sort(ranked.begin(), ranked.end());
    std::vector<double> out;
    for (std::size_t k = 0; k < ranked.size() && k < limit; ++k) out.push_back(ranked[k].second);
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1));
    return out;
}

Outcome sign_outcome(double value, double tol) {
    if (value < -tol) return Outcome::HESatisfied;
    if (value > tol) return Outcome::StableIndication;
    return Outcome::Inconclusive;
}

double kernel(int dimension, double x) {
    switch (dimension) {
        case 1: return std::cos(x);
        case 2: return boost::math::cyl_bessel_j(0, x);
        default: return x == 0.0 ? 1.0 : std::sin(x) / x;
    }
}

void attach(StabilityVerdict& v, GridDensity density, EnergyReport energy) {
    v.certificate = std::move(density);
    v.certificate_energy = std::move(energy);
}

// Witness search shared by the integral and Fourier criteria when the plain
// integral is negative.
bool attach_integral_witness(StabilityVerdict& v, const RadialPotential& p,
                             const StabilityOptions& options) {
    try {
        auto w = ball_witness_auto(p, options);
        attach(v, std::move(w.density), std::move(w.energy));
        return true;
    } catch (const NumericalError&) {
    }
    std::vector<ScanPoint> coarse;
    for (double q : log_grid(1e-3, 1e3, 25)) {
        try {
            coarse.push_back({q, gaussian_weighted_integral(p, q, options.quad_tol)});
        } catch (const NumericalError&) {
        }
    }
    if (auto w = first_gaussian_witness(p, rank_gaussian_candidates(p.dimension(), coarse, 4), options)) {
        attach(v, std::move(w->density), std::move(w->energy));
        return true;
    }
    return false;
}

}  // namespace

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::RucSearch: return "ruc_search";
        case Criterion::Integral: return "integral";
        case Criterion::GaussianWeighted: return "gaussian_weighted";
        case Criterion::Fourier: return "fourier";
    }
    return "?";
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::HESatisfied: return "HE_satisfied";
        case Outcome::StableIndication: return "stable_indication";
        case Outcome::Inconclusive: return "inconclusive";
    }
    return "?";
}

StabilityVerdict integral_criterion(const RadialPotential& p, const StabilityOptions& options) {
    if (tail_class(p) != TailClass::H3b)
        throw PreconditionViolated("integral criterion requires (H3b)");
    const auto r = plain_integral(p, options.quad_tol);

    StabilityVerdict v;
    v.criterion = Criterion::Integral;
    v.numeric_value = r.value;
    v.parameter = kNaN;
    std::ostringstream dom;
    dom.precision(17);
    dom << "r in [0, " << r.cutoff << "], tail below quad_tol";
    v.scanned_domain = dom.str();
    v.outcome = sign_outcome(r.value, options.verdict_tol);
    if (v.outcome == Outcome::HESatisfied && !attach_integral_witness(v, p, options)) {
        v.outcome = Outcome::Inconclusive;
        v.note = "negative integral but no witness density with negative energy was found";
    }
    return v;
}

BallWitness ball_witness(const RadialPotential& p, double R, int n_scale,
                         const StabilityOptions& options) {
    if (!(R > 0.0) || n_scale < 1) throw InvalidArgument("ball witness needs R > 0 and n_scale >= 1");
    if (tail_class(p) != TailClass::H3b)
        throw PreconditionViolated("ball witness requires (H3b)");
    const double value = plain_integral(p, options.quad_tol).value;
    if (!(value < -options.verdict_tol))
        throw PreconditionViolated("ball witness requires a negative integral of W");
    auto w = build_ball(p, R * n_scale, options);
    if (!(w.energy.value < 0.0))
        throw WitnessFailed("ball witness energy is not negative", w.energy.value);
    return w;
}

BallWitness ball_witness_auto(const RadialPotential& p, const StabilityOptions& options) {
    if (tail_class(p) != TailClass::H3b)
        throw PreconditionViolated("ball witness requires (H3b)");
    const auto total = plain_integral(p, options.quad_tol);
    if (!(total.value < -options.verdict_tol))
        throw PreconditionViolated("ball witness requires a negative integral of W");

    // R: first radius ls 2^k whose ball already carries a negative integral
    // with the remaining |W| mass below a quarter of |value|.
    const int dim = p.dimension();
    const double s = sphere_area(dim);
    const double ls = p.length_scale();
    auto f = [&](double r) { return r <= 0.0 ? 0.0 : p(r) * std::pow(r, dim - 1); };
    auto part = quad::integrate_singular_left(f, 0.0, ls, options.quad_tol);
    double R = ls;
    for (int k = 0; k < 60; ++k) {
        const double partial = s * part.value;
        const double tail = total.l1 - s * part.l1;
        if (partial < 0.0 && tail < 0.25 * std::abs(total.value)) break;
        const auto next = quad::integrate_panels(
            [&](double r) { return f(R + r); }, R, R, options.quad_tol, {});
        part.value += next.value;
        part.l1 += next.l1;
        R *= 2.0;
    }

    double last_energy = kNaN;
    const std::size_t cap = axis_cap(dim, options.max_witness_cells) / 2;
    for (int n_scale = 1; n_scale <= 1 << 12; n_scale *= 2) {
        const double radius = R * n_scale;
        // Stop once the grid can no longer resolve W.
        if (radius / static_cast<double>(cap) > 2.0 * ls && n_scale > 1) break;
        try {
            auto w = build_ball(p, radius, options);
            last_energy = w.energy.value;
            if (w.energy.value < 0.0) return w;
        } catch (const QuadratureFailure&) {
        }
    }
    throw WitnessFailed("no ball witness with negative energy within the grid budget", last_energy);
}

double gaussian_weighted_integral(const RadialPotential& p, double weight_p, double quad_tol) {
    if (!(weight_p >= 0.0)) throw InvalidArgument("Gaussian weight needs p >= 0");
    const double p2 = weight_p * weight_p;
    return radial_integral(
               p, [p2](double r) { return std::exp(-p2 * r * r); }, quad_tol,
               inner_radius(p, weight_p))
        .value;
}

std::vector<double> default_p_grid() { return log_grid(1e-3, 1e3, 200); }

StabilityVerdict gaussian_criterion(const RadialPotential& p, const std::vector<double>& p_grid,
                                    const StabilityOptions& options) {
    for (double q : p_grid)
        if (!(q > 0.0)) throw InvalidArgument("p grid values must be positive");
    const bool integrable = tail_class(p) == TailClass::H3b;

    StabilityVerdict v;
    v.criterion = Criterion::GaussianWeighted;
    v.advisory = !integrable;
    if (integrable) v.scan.push_back({0.0, plain_integral(p, options.quad_tol).value});
    for (double q : p_grid) v.scan.push_back({q, gaussian_weighted_integral(p, q, options.quad_tol)});

    // Refine around the best interior grid point in log p.
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < p_grid.size(); ++k) {
        const std::size_t idx = k + (integrable ? 1 : 0);
        if (!found || v.scan[idx].value < v.scan[best].value) {
            best = idx;
            found = true;
        }
    }
    const std::size_t first_p = integrable ? 1 : 0;
    if (found && best > first_p && best + 1 < v.scan.size()) {
        auto objective = [&](double t) {
            return gaussian_weighted_integral(p, std::exp(t), options.quad_tol);
        };
        try {
            const auto [t, value] = boost::math::tools::brent_find_minima(
                objective, std::log(v.scan[best - 1].parameter), std::log(v.scan[best + 1].parameter), 30);
            v.scan.push_back({std::exp(t), value});
        } catch (const NumericalError&) {
        }
    }

    auto min_it = std::min_element(v.scan.begin(), v.scan.end(),
                                   [](const ScanPoint& a, const ScanPoint& b) { return a.value < b.value; });
    v.numeric_value = min_it->value;
    v.parameter = min_it->parameter;
    std::ostringstream dom;
    dom.precision(17);
    dom << "p in " << (integrable ? "{0} u " : "") << "[" << p_grid.front() << ", " << p_grid.back()
        << "], " << p_grid.size() << " log-spaced points plus local refinement";
    v.scanned_domain = p_grid.empty() ? std::string("p = 0") : dom.str();

    v.outcome = sign_outcome(v.numeric_value, options.verdict_tol);
    if (v.outcome == Outcome::HESatisfied) {
        auto w = first_gaussian_witness(p, rank_gaussian_candidates(p.dimension(), v.scan, 6), options);
        if (w) {
            v.parameter = w->p;
            attach(v, std::move(w->density), std::move(w->energy));
        } else {
            v.outcome = Outcome::Inconclusive;
            v.note = "negative weighted integral but no Gaussian witness with negative energy";
        }
    }
    if (v.advisory) v.note += v.note.empty() ? "advisory: W is not in (H3b)" : "; advisory: W is not in (H3b)";
    return v;
}

std::vector<double> default_xi_grid() {
    std::vector<double> out{0.0};
    const auto tail = log_grid(1e-2, 1e2, 160);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

double radial_fourier_transform(const RadialPotential& p, double xi, double quad_tol) {
    const int dim = p.dimension();
    if (dim > 3) throw DimensionUnsupported("Fourier transform implemented for N <= 3");
    if (!(xi >= 0.0)) throw InvalidArgument("frequency must be nonnegative");
    try {
        radial_integral(p, [&p](double r) { return p(r); }, quad_tol, inner_radius(p, 0.0));
    } catch (const NotAbsolutelyIntegrable& e) {
        throw NotSquareIntegrable(std::string("W^2 r^{N-1} is not integrable: ") + e.what());
    } catch (const QuadratureFailure& e) {
        throw NotSquareIntegrable(std::string("W^2 r^{N-1} is not integrable near 0: ") + e.what());
    }
    const auto plain = plain_integral(p, quad_tol);
    if (xi == 0.0) return plain.value;

    const double s = sphere_area(dim);
    auto f = [&](double r) -> double {
        if (r <= 0.0) return 0.0;
        const double w = p(r);
        return w == 0.0 ? 0.0 : w * kernel(dim, xi * r) * std::pow(r, dim - 1);
    };
    const double panel = std::min(std::numbers::pi / xi, plain.cutoff);
    const auto coarse = quad::integrate_panels(f, plain.cutoff, panel, quad_tol, p.breakpoints());
    const auto fine = quad::integrate_panels(f, plain.cutoff, 0.5 * panel, quad_tol, p.breakpoints());
    const double scale = std::max(1.0, s * plain.l1);
    if (std::abs(coarse.value - fine.value) * s > 10.0 * quad_tol * scale) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "transform at xi = " << xi << " changed by " << std::abs(coarse.value - fine.value) * s
            << " between panel sizes";
        throw OscillatoryQuadratureFailure(msg.str());
    }
    return s * fine.value;
}

StabilityVerdict fourier_criterion(const RadialPotential& p, const std::vector<double>& xi_grid,
                                   const StabilityOptions& options) {
    if (xi_grid.empty()) throw InvalidArgument("xi grid is empty");
    StabilityVerdict v;
    v.criterion = Criterion::Fourier;
    for (double xi : xi_grid) v.scan.push_back({xi, radial_fourier_transform(p, xi, options.quad_tol)});

    auto min_it = std::min_element(v.scan.begin(), v.scan.end(),
                                   [](const ScanPoint& a, const ScanPoint& b) { return a.value < b.value; });
    auto max_it = std::max_element(v.scan.begin(), v.scan.end(),
                                   [](const ScanPoint& a, const ScanPoint& b) { return a.value < b.value; });
    v.numeric_value = min_it->value;
    v.parameter = min_it->parameter;
    std::ostringstream dom;
    dom.precision(17);
    dom << "xi in [" << xi_grid.front() << ", " << xi_grid.back() << "], " << xi_grid.size() << " points";
    v.scanned_domain = dom.str();

    if (v.numeric_value < -options.verdict_tol) {
        bool found = false;
        if (v.scan.front().parameter == 0.0 && v.scan.front().value < -options.verdict_tol)
            found = attach_integral_witness(v, p, options);
        const double xi = v.parameter;
        if (!found && xi > 0.0) {
            const double ls = p.length_scale();
            for (double factor : {1.0, 2.0, 4.0}) {
                const double sigma = factor * std::max(6.0 / xi, 2.0 * ls);
                double h = std::min(0.5 * ls, std::numbers::pi / (4.0 * xi));
                const double cap = static_cast<double>(axis_cap(p.dimension(), options.max_witness_cells));
                h = std::max(h, 10.0 * sigma / cap);
                try {
                    auto rho = modulated_gaussian_density(sigma, xi, 1.0, p.dimension(), h, 5.0);
                    auto e = witness_energy(p, rho);
                    if (e.value < 0.0) {
                        attach(v, std::move(rho), std::move(e));
                        found = true;
                        break;
                    }
                } catch (const NumericalError&) {
                }
            }
        }
        if (found) {
            v.outcome = Outcome::HESatisfied;
        } else {
            v.outcome = Outcome::Inconclusive;
            v.note = "negative transform but no witness density with negative energy";
        }
    } else if (max_it->value > options.verdict_tol) {
        // A decaying transform drops into the noise band at large xi, so
        // positivity is judged where it is resolved.
        v.outcome = Outcome::StableIndication;
        double resolved = 0.0;
        for (const auto& s : v.scan)
            if (s.value > options.verdict_tol) resolved = std::max(resolved, s.parameter);
        std::ostringstream note;
        note.precision(17);
        note << "transform above verdict_tol for xi <= " << resolved
             << " and never below -verdict_tol on the grid";
        v.note = note.str();
    } else {
        v.outcome = Outcome::Inconclusive;
        v.note = "transform vanishes on the scanned grid";
    }
    return v;
}

RucCheck check_ruc(const RadialPotential& p, const PointCloud& config, double B) {
    const std::size_t n = config.size();
    if (n < 2) throw InvalidArgument("(Ruc) check needs at least two points");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(config.weight(i) - config.weight(0)) > 1e-12 * std::abs(config.weight(0)))
            throw InvalidArgument("(Ruc) check needs equal weights");
    if (!config.has_distinct_points()) throw InvalidArgument("(Ruc) check needs distinct points");
    RucCheck out;
    out.value = per_pair_energy(p, config);
    out.holds = out.value >= -B / static_cast<double>(n);
    return out;
}

StabilityVerdict ruc_search(const RadialPotential& p, const std::vector<std::size_t>& n_list,
                            const std::vector<std::uint64_t>& seeds, std::size_t optimizer_budget,
                            const StabilityOptions& options, const RucSearchOptions& search) {
    if (n_list.empty() || seeds.empty()) throw InvalidArgument("ruc_search needs n values and seeds");
    StabilityVerdict v;
    v.criterion = Criterion::RucSearch;
    v.advisory = p.singular_at_origin();

    MinimizeOptions mopt;
    mopt.verify_invariants = true;
    std::optional<MinimizationTrace> best;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t best_n = 0;
    for (std::size_t n : n_list) {
        auto result = multi_start(p, n, search.inits, seeds, optimizer_budget, search.grad_tol, mopt);
        bool all_stalled = true;
        for (const auto& run : result.runs)
            all_stalled &= run.stalled && run.iterates.size() == 1 && run.final_gradient_norm >= search.grad_tol;
        if (all_stalled) throw OptimizerStalled("no start made progress for n = " + std::to_string(n));
        const double per_pair = 0.5 * result.best.final_energy();
        v.scan.push_back({static_cast<double>(n), per_pair});
        if (per_pair < best_value) {
            best_value = per_pair;
            best_n = n;
            best = std::move(result.best);
        }
    }
    v.numeric_value = best_value;
    v.parameter = static_cast<double>(best_n);

    // Least squares m(n) = c + d/n.
    double c = v.scan.front().value, d = 0.0;
    if (v.scan.size() > 1) {
        double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (const auto& pt : v.scan) {
            const double x = 1.0 / pt.parameter;
            s1 += 1;
            sx += x;
            sxx += x * x;
            sy += pt.value;
            sxy += x * pt.value;
        }
        const double det = s1 * sxx - sx * sx;
        if (det != 0.0) {
            c = (sxx * sy - sx * sxy) / det;
            d = (s1 * sxy - sx * sy) / det;
        }
    }
    v.fit_c = c;
    v.fit_d = d;

    std::ostringstream dom;
    dom << "n in {";
    for (std::size_t k = 0; k < n_list.size(); ++k) dom << (k ? "," : "") << n_list[k];
    dom << "}, " << seeds.size() << " seeds x " << search.inits.size() << " initializations, budget "
        << optimizer_budget;
    v.scanned_domain = dom.str();

    if (c < -10.0 * options.verdict_tol) {
        const auto report = energy_pointcloud(p, best->final_config, true);
        if (report.value < 0.0) {
            v.outcome = Outcome::HESatisfied;
            v.certificate = best->final_config;
            v.certificate_energy = report;
        } else {
            v.outcome = Outcome::Inconclusive;
            v.note = "per-pair minima tend to a negative constant but the empirical measure has "
                     "nonnegative energy with the diagonal included";
        }
    } else {
        v.outcome = Outcome::StableIndication;
        double B = 0.0;
        for (const auto& pt : v.scan) B = std::max(B, -pt.parameter * pt.value);
        std::ostringstream note;
        note.precision(17);
        note << "minima consistent with -B/n for B = " << B;
        v.note = note.str();
    }
    if (v.advisory) v.note += "; advisory: W is singular at the origin";
    return v;
}

}  // namespace nli
