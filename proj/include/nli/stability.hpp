#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nli/energy.hpp"
#include "nli/groundstate.hpp"
#include "nli/measure.hpp"
#include "nli/potential.hpp"

namespace nli {

enum class Criterion { RucSearch, Integral, GaussianWeighted, Fourier };
enum class Outcome { HESatisfied, StableIndication, Inconclusive };

std::string to_string(Criterion c);
std::string to_string(Outcome o);

using Witness = std::variant<std::monostate, PointCloud, GridDensity>;

struct ScanPoint {
    double parameter;
    double value;
};

struct StabilityVerdict {
    Criterion criterion = Criterion::Integral;
    Outcome outcome = Outcome::Inconclusive;
    /// Integral value, min over p, min of the transform, or best per-pair
    /// energy, depending on the criterion.
    double numeric_value = 0.0;
    /// p, xi or n at which numeric_value is attained; NaN for the integral.
    double parameter = 0.0;
    Witness certificate;
    /// Energy of the certificate as evaluated by the energy module.
    std::optional<EnergyReport> certificate_energy;
    /// Scanned values (p, xi, or n with its minimum).
    std::vector<ScanPoint> scan;
    std::string scanned_domain;
    /// Set when the criterion ran outside the hypotheses it is proved under.
    bool advisory = false;
    std::string note;
    /// (Ruc) fit c + d/n of the per-pair minima.
    std::optional<double> fit_c;
    std::optional<double> fit_d;
};

struct StabilityOptions {
    double quad_tol = 1e-8;
    /// Values within +-verdict_tol of zero are inconclusive.
    double verdict_tol = 1e-6;
    /// Upper bound on grid cells of a witness density.
    std::size_t max_witness_cells = 600000;
};

/// S_{N-1} int_0^inf W(r) r^{N-1} dr. Throws PreconditionViolated unless W
/// is in (H3b) and NotAbsolutelyIntegrable when |W| is not integrable.
StabilityVerdict integral_criterion(const RadialPotential& p, const StabilityOptions& options = {});

/// Log-spaced p grid [1e-3, 1e3] with 200 points.
std::vector<double> default_p_grid();

/// S_{N-1} int W(r) e^{-p^2 r^2} r^{N-1} dr over p_grid, plus p = 0 when W is
/// absolutely integrable; the best p is refined by a local search. HE needs a
/// Gaussian witness with negative grid energy.
StabilityVerdict gaussian_criterion(const RadialPotential& p, const std::vector<double>& p_grid,
                                    const StabilityOptions& options = {});

/// Value of the Gaussian-weighted integral at a single p >= 0.
double gaussian_weighted_integral(const RadialPotential& p, double weight_p, double quad_tol);

/// xi = 0 plus 160 log-spaced points on [1e-2, 1e2].
std::vector<double> default_xi_grid();

/// Radial Fourier transform w^(xi) = int_{R^N} W(|x|) e^{-i x.xi} dx for
/// N <= 3. Throws NotSquareIntegrable, NotAbsolutelyIntegrable when the tail
/// cannot be truncated, and OscillatoryQuadratureFailure when two panel
/// sizes disagree.
double radial_fourier_transform(const RadialPotential& p, double xi, double quad_tol);

StabilityVerdict fourier_criterion(const RadialPotential& p, const std::vector<double>& xi_grid,
                                   const StabilityOptions& options = {});

struct RucCheck {
    bool holds = false;
    /// (1/n^2) sum_{i<j} W(|x_i - x_j|).
    double value = 0.0;
};

/// Compares the per-pair energy of an equal-weight configuration on distinct
/// points with -B/n.
RucCheck check_ruc(const RadialPotential& p, const PointCloud& config, double B);

struct RucSearchOptions {
    std::vector<Init> inits{Init::Lattice, Init::RandomBall, Init::TwoCluster};
    double grad_tol = 1e-12;
};

/// Multi-start minimization of the per-pair energy for each n, then a least
/// squares fit c + d/n of the minima. c < -10 verdict_tol is reported as HE
/// with the best empirical measure as certificate. Throws OptimizerStalled
/// when no start makes progress.
StabilityVerdict ruc_search(const RadialPotential& p, const std::vector<std::size_t>& n_list,
                            const std::vector<std::uint64_t>& seeds, std::size_t optimizer_budget,
                            const StabilityOptions& options = {},
                            const RucSearchOptions& search = {});

struct BallWitness {
    GridDensity density;
    EnergyReport energy;
    double radius = 0.0;
};

/// Uniform density on the ball of radius n_scale * R with its grid energy.
/// Refuses (PreconditionViolated) unless the integral criterion finds a
/// negative integral; throws WitnessFailed when the energy is not negative.
BallWitness ball_witness(const RadialPotential& p, double R, int n_scale,
                         const StabilityOptions& options = {});

/// ball_witness with R taken from the partial integrals of W and n_scale
/// doubled until the energy is negative or the grid budget is exhausted.
BallWitness ball_witness_auto(const RadialPotential& p, const StabilityOptions& options = {});

}  // namespace nli
