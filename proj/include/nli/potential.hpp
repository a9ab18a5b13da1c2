#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nli {

/// |x|^a/a - |x|^r/r with -N < r < a; the attractive-repulsive power law.
struct PowerLaw {
    double a;
    double r;
};

/// e^{-r} - G e^{-r/L}.
struct Morse {
    double G;
    double L;
};

struct GaussianTerm {
    double amplitude;
    double width;
};

/// Sum of amplitude * exp(-(r/width)^2). An empty mix is the zero potential.
struct GaussianMix {
    std::vector<GaussianTerm> terms;
};

struct Knot {
    double radius;
    double value;
};

/// Piecewise-linear profile through the knots; constant first value below the
/// first knot, zero beyond the last one.
struct Tabulated {
    std::vector<Knot> knots;
};

/// coefficient * r^exponent, exponent > 0 (pure attraction for positive
/// coefficients).
struct Power {
    double coefficient;
    double exponent;
};

using Family = std::variant<PowerLaw, Morse, GaussianMix, Tabulated, Power>;

enum class TailClass { H3a, H3b, Neither };

std::string to_string(TailClass c);

/// Radially symmetric pair potential w(x) = W(|x|) in dimension N.
///
/// Immutable after construction; all member functions are safe to call
/// concurrently.
class RadialPotential {
  public:
    RadialPotential(Family family, int dimension);

    /// W(radius). Returns +inf only for a singular power law at radius 0.
    double operator()(double radius) const;

    /// W'(radius) for radius > 0. Throws NonDifferentiable for tabulated
    /// profiles.
    double derivative(double radius) const;

    bool differentiable() const noexcept;
    bool singular_at_origin() const noexcept;
    double value_at_zero() const noexcept { return (*this)(0.0); }

    int dimension() const noexcept { return dimension_; }
    const Family& family() const noexcept { return family_; }

    /// Tail class known in closed form; empty for tabulated profiles.
    std::optional<TailClass> analytic_tail_class() const;

    /// Characteristic length over which W varies; used to size grids and
    /// initial particle spacings.
    double length_scale() const;

    /// Radius beyond which |W| is below 1e-12 of its typical size; +inf when W
    /// does not decay.
    double interaction_range() const;

    /// Radii at which W is not smooth (tabulated knots).
    std::vector<double> breakpoints() const;

    /// Radius past which W vanishes identically; +inf if none.
    double support_end() const;

    std::string family_name() const;
    std::string describe() const;

  private:
    Family family_;
    int dimension_;
};

inline double eval(const RadialPotential& p, double radius) { return p(radius); }

enum class H1Status { HoldsByConstruction, NotChecked };
enum class H2Status { Holds, Fails, Inconclusive };

std::string to_string(H1Status s);
std::string to_string(H2Status s);

struct TailProbe {
    double radius;
    double value;
};

struct HypothesisReport {
    H1Status h1_lsc = H1Status::HoldsByConstruction;
    H2Status h2_locally_integrable = H2Status::Inconclusive;
    /// S_{N-1} * int_0^1 |W(r)| r^{N-1} dr; +inf when divergent.
    double h2_value = 0.0;
    /// Partial integrals over [10^{-k}, 1], k = 2..10.
    std::vector<double> h2_cutoff_estimates;
    TailClass h3_class = TailClass::Neither;
    std::vector<TailProbe> h3_probes;
    double c_w = 0.0;
    double c_w_radius = 0.0;
};

/// Numerical probes of lower-semicontinuity, local integrability, tail class
/// and the lower bound C_W. Throws QuadratureFailure when a decade of the
/// local-integrability quadrature misses quad_tol.
HypothesisReport probe_hypotheses(const RadialPotential& p, double quad_tol);

/// Tail class from the closed form when available, otherwise from probes.
TailClass tail_class(const RadialPotential& p);

struct Infimum {
    double value;
    double radius;
};

/// Estimate of inf_{r>0} W(r) on a log grid [1e-8, 1e8] polished by Brent
/// search around every grid-local minimum.
Infimum infimum_estimate(const RadialPotential& p);

/// Unit sphere surface area S_{N-1} and unit ball volume omega_N.
double sphere_area(int dimension);
double ball_volume(int dimension);

}  // namespace nli
