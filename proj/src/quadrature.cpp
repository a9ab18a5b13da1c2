#include "nli/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nli/errors.hpp"

namespace nli::quad {

namespace {

constexpr unsigned kMaxDepth = 18;
constexpr double kInnerTol = 1e-13;

void check(const Result& r, double a, double b, double tol) {
    if (!std::isfinite(r.value) || r.error > tol * std::max(1.0, r.l1)) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] did not reach tolerance " << tol
            << " (error estimate " << r.error << ")";
        throw QuadratureFailure(msg.str());
    }
}

// Splits [a, b] at the breakpoints strictly inside it.
std::vector<double> split(double a, double b, const std::vector<double>& breakpoints) {
    std::vector<double> nodes{a};
    for (double x : breakpoints)
        if (x > a && x < b) nodes.push_back(x);
    nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

void accumulate(Result& total, const Result& part) {
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
}

}  // namespace

namespace {

Result kronrod_panel(const Integrand& f, double a, double b) {
    Result r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &r.error,
                                                                            &r.l1);
    // Without subdivision Boost reports the error on the reference interval
    // [-1, 1]; only the L1 norm is rescaled.
    r.error *= 0.5 * std::abs(b - a);
    return r;
}

// Bisection until each panel error is below its share of abs_tol. The
// target is absolute (scaled by the integral of |f|) so that integrals
// which cancel to nearly zero do not force maximal refinement.
Result bisect(const Integrand& f, double a, double b, const Result& whole, unsigned depth,
              double abs_tol) {
    if (depth == 0 || whole.error <= abs_tol) return whole;
    const double mid = 0.5 * (a + b);
    const Result left = bisect(f, a, mid, kronrod_panel(f, a, mid), depth - 1, 0.5 * abs_tol);
    const Result right = bisect(f, mid, b, kronrod_panel(f, mid, b), depth - 1, 0.5 * abs_tol);
    return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, double tol) {
    Result r;
    if (a == b) return r;
    const Result whole = kronrod_panel(f, a, b);
    if (whole.l1 == 0.0 && whole.value == 0.0) return whole;
    r = bisect(f, a, b, whole, kMaxDepth, std::max(kInnerTol * whole.l1, 1e-4 * tol));
    check(r, a, b, tol);
    return r;
}

Result integrate_singular_left(const Integrand& f, double a, double b, double tol) {
    Result r;
    if (a == b) return r;
    static thread_local boost::math::quadrature::tanh_sinh<double> rule;
    // The rule samples x - a directly so the singularity is resolved without
    // cancellation.
    auto shifted = [&](double t) { return f(a + t); };
    try {
        r.value = rule.integrate(shifted, 0.0, b - a, kInnerTol, &r.error, &r.l1);
    } catch (const std::exception& e) {
        throw QuadratureFailure(std::string("double-exponential quadrature failed: ") + e.what());
    }
    check(r, a, b, tol);
    return r;
}

HalfLineResult integrate_half_line(const Integrand& f, double tol, const HalfLineOptions& options) {
    HalfLineResult out;
    Result total;

    const double inner = std::min(options.inner, options.support_end);
    auto first = split(0.0, inner, options.breakpoints);
    for (std::size_t i = 0; i + 1 < first.size(); ++i) {
        const Result part = i == 0 ? integrate_singular_left(f, first[0], first[1], tol)
                                   : integrate(f, first[i], first[i + 1], tol);
        accumulate(total, part);
    }

    double lo = inner;
    double previous_l1 = -1.0;
    int shrinking = 0;
    while (lo < options.support_end) {
        if (lo > options.max_radius) {
            std::ostringstream msg;
            msg << "integrand tail does not decay: panel mass " << previous_l1 << " at radius " << lo;
            throw NotAbsolutelyIntegrable(msg.str());
        }
        const double hi = std::min(2.0 * lo, options.support_end);
        Result panel;
        auto nodes = split(lo, hi, options.breakpoints);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            accumulate(panel, integrate(f, nodes[i], nodes[i + 1], tol));
        accumulate(total, panel);
        lo = hi;

        if (previous_l1 > 0.0) {
            const double ratio = panel.l1 / previous_l1;
            if (ratio < 0.95) {
                ++shrinking;
                const double tail = panel.l1 * ratio / (1.0 - ratio);
                if (shrinking >= 2 && tail < 0.1 * tol * std::max(1.0, total.l1)) break;
            } else {
                shrinking = 0;
            }
        }
        if (panel.l1 == 0.0 && previous_l1 == 0.0) break;
        previous_l1 = panel.l1;
    }

    out.value = total.value;
    out.error = total.error;
    out.l1 = total.l1;
    out.cutoff = lo;
    return out;
}

Result integrate_panels(const Integrand& f, double cutoff, double panel_length, double tol,
                        const std::vector<double>& breakpoints) {
    Result total;
    if (cutoff <= 0.0) return total;
    const auto panels = static_cast<std::size_t>(std::ceil(cutoff / panel_length));
    std::vector<double> nodes;
    nodes.reserve(panels + 1 + breakpoints.size());
    for (std::size_t k = 0; k <= panels; ++k)
        nodes.push_back(std::min(cutoff, static_cast<double>(k) * panel_length));
    for (double x : breakpoints)
        if (x > 0.0 && x < cutoff) nodes.push_back(x);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Result part = i == 0 ? integrate_singular_left(f, nodes[0], nodes[1], tol)
                                   : integrate(f, nodes[i], nodes[i + 1], tol);
        accumulate(total, part);
    }
    return total;
}

}  // namespace nli::quad
