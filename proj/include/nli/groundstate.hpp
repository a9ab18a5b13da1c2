#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nli/measure.hpp"
#include "nli/potential.hpp"

namespace nli {

enum class Init { Lattice, RandomBall, TwoCluster };
enum class Classification { Tight, Vanishing, Dichotomy, Undecided };

std::string to_string(Init init);
std::string to_string(Classification c);
Init parse_init(const std::string& name);

struct Iterate {
    std::size_t iteration = 0;
    /// Off-diagonal energy (2/n^2) sum_{i<j} W(|x_i - x_j|).
    double energy = 0.0;
    /// 90% quantile of the distances to the centroid.
    double q90_radius = 0.0;
    double max_pair_distance = 0.0;
    /// Step accepted by the line search to reach this iterate (0 at start).
    double step = 0.0;
    double median_nn_distance = 0.0;
    /// Largest fraction of particles in a closed ball of radius
    /// interaction_range centred at a particle (1 when the range is infinite).
    double max_ball_mass = 1.0;
    /// 2-means split of the configuration: mass fraction of the smaller
    /// cluster, min inter-cluster distance, and that distance over the larger
    /// cluster diameter.
    double split_fraction = 1.0;
    double split_gap = 0.0;
    double split_gap_ratio = 0.0;
};

struct MinimizationTrace {
    std::vector<Iterate> iterates;
    PointCloud final_config;
    Classification classification = Classification::Undecided;
    /// Mass fraction alpha of the smaller cluster when a dichotomy is reported.
    std::optional<double> alpha;
    std::size_t n_points = 0;
    std::uint64_t seed = 0;
    Init init = Init::Lattice;
    double final_gradient_norm = 0.0;
    /// Line search found no descent step before max_iter.
    bool stalled = false;
    /// Gradient norm fell below grad_tol before max_iter.
    bool converged = false;
    /// Diagonal-inclusive energy of the final configuration (+inf for
    /// singular W).
    double final_energy_with_diagonal = 0.0;
    /// interaction_range() of the potential, used by the classifier.
    double interaction_range = 0.0;

    double final_energy() const { return iterates.empty() ? 0.0 : iterates.back().energy; }
};

struct MinimizeOptions {
    /// Check descent and recentring invariance every iteration; violations
    /// throw InvariantViolation.
    bool verify_invariants = true;
    /// Classification parameters; window 0 selects max_iter / 4.
    std::size_t window = 0;
    double growth_factor = 2.0;
    double cluster_gap_ratio = 3.0;
};

/// Gradient descent with Armijo backtracking on the off-diagonal discrete
/// energy of n equal-weight particles, recentred to the centroid every
/// iteration. Stops when the gradient norm falls below grad_tol, the line
/// search fails, or after max_iter iterations. Throws NonDifferentiable for
/// tabulated profiles and InvalidArgument for n < 2.
MinimizationTrace minimize_particles(const RadialPotential& p, std::size_t n, Init init,
                                     std::uint64_t seed, std::size_t max_iter, double grad_tol,
                                     const MinimizeOptions& options = {});

/// Off-diagonal energy and its gradient for a flat coordinate array.
double particle_energy(const RadialPotential& p, const std::vector<double>& coords,
                       std::vector<double>* gradient);

/// Initial configuration used by minimize_particles.
std::vector<double> initial_configuration(const RadialPotential& p, std::size_t n, Init init,
                                          std::uint64_t seed);

Classification classify_trace(const MinimizationTrace& trace, std::size_t window,
                              double growth_factor, double cluster_gap_ratio,
                              std::optional<double>* alpha = nullptr);

struct MultiStartResult {
    MinimizationTrace best;
    std::vector<MinimizationTrace> runs;
};

/// Runs every (init, seed) pair and keeps the lowest final energy, ties
/// broken by run order.
MultiStartResult multi_start(const RadialPotential& p, std::size_t n,
                             const std::vector<Init>& inits,
                             const std::vector<std::uint64_t>& seeds, std::size_t max_iter,
                             double grad_tol, const MinimizeOptions& options = {});

struct ScanRow {
    std::vector<double> params;
    /// Seed of the row; empty for the aggregate row of a cell.
    std::optional<std::uint64_t> seed;
    std::optional<Classification> classification;
    double energy = 0.0;
    std::string error;
};

using PotentialFactory = std::function<RadialPotential(const std::vector<double>&)>;

/// For each parameter cell and seed, one minimize_particles run; per cell an
/// aggregate row with the best energy and the majority classification
/// (ties resolved toward the best seed). Cells whose potential cannot be
/// built or whose runs fail get an error row and the scan continues.
std::vector<ScanRow> ground_state_scan(const PotentialFactory& factory,
                                       const std::vector<std::vector<double>>& param_grid,
                                       std::size_t n, const std::vector<std::uint64_t>& seeds,
                                       Init init, std::size_t max_iter, double grad_tol,
                                       const MinimizeOptions& options = {});

}  // namespace nli
