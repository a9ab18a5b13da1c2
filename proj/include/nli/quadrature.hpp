#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace nli::quad {

using Integrand = std::function<double(double)>;

struct Result {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;  // estimate of the integral of |f|
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval. Throws
/// QuadratureFailure when the error estimate exceeds tol * max(1, l1).
Result integrate(const Integrand& f, double a, double b, double tol);

/// Double-exponential rule for [a, b] with an integrable endpoint
/// singularity at a.
Result integrate_singular_left(const Integrand& f, double a, double b, double tol);

struct HalfLineOptions {
    std::vector<double> breakpoints;
    /// Start of the geometric panels; [0, inner] uses the singular rule.
    double inner = 1.0;
    /// f is identically zero past this radius.
    double support_end = std::numeric_limits<double>::infinity();
    double max_radius = 1e15;
};

struct HalfLineResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    /// Radius where summation stopped; the tail beyond it is below tol.
    double cutoff = 0.0;
};

/// Integral over [0, inf) by geometric panels [R, 2R], stopped once the
/// geometric extrapolation of the |f| tail is below tol. Throws
/// NotAbsolutelyIntegrable when the panels stop shrinking before max_radius.
HalfLineResult integrate_half_line(const Integrand& f, double tol,
                                   const HalfLineOptions& options = {});

/// Integral over [0, cutoff] with panels no longer than panel_length; used
/// for oscillatory kernels.
Result integrate_panels(const Integrand& f, double cutoff, double panel_length,
                        double tol, const std::vector<double>& breakpoints = {});

}  // namespace nli::quad
