#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nli {

/// Finite nonnegative measure sum_i w_i delta_{x_i} on R^N. Coordinates are
/// stored point-major in one flat array.
class PointCloud {
  public:
    PointCloud() = default;
    PointCloud(int dimension, std::vector<double> coordinates, std::vector<double> weights);

    /// Equal weights 1/n.
    static PointCloud empirical(int dimension, std::vector<double> coordinates);

    int dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return weights_.size(); }
    bool empty() const noexcept { return weights_.empty(); }

    std::span<const double> point(std::size_t i) const {
        return {coordinates_.data() + i * static_cast<std::size_t>(dimension_),
                static_cast<std::size_t>(dimension_)};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& coordinates() const noexcept { return coordinates_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    double total_mass() const;
    bool is_probability() const;
    bool has_distinct_points() const;

    PointCloud translated(std::span<const double> shift) const;
    PointCloud scaled(double factor) const;

    /// Sum of measures: the union of both atom sets.
    friend PointCloud operator+(const PointCloud& lhs, const PointCloud& rhs);

  private:
    int dimension_ = 1;
    std::vector<double> coordinates_;
    std::vector<double> weights_;
};

/// Piecewise-constant density on a regular box grid in dimension N <= 3.
/// Cell (i_1, ..., i_N) covers origin + h * [i, i + 1); values are densities
/// (mass per volume), stored with the first axis varying slowest.
class GridDensity {
  public:
    GridDensity() = default;
    GridDensity(int dimension, std::vector<double> origin, double cell_width,
                std::vector<int> extents, std::vector<double> values);

    int dimension() const noexcept { return dimension_; }
    const std::vector<double>& origin() const noexcept { return origin_; }
    double cell_width() const noexcept { return cell_width_; }
    const std::vector<int>& extents() const noexcept { return extents_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t cell_count() const noexcept { return values_.size(); }
    double cell_volume() const;

    std::array<int, 3> cell_index(std::size_t flat) const;
    std::array<double, 3> cell_center(std::size_t flat) const;

    double mass() const;
    GridDensity normalized() const;

    /// Atoms carrying each cell's mass, placed on a subdivisions^N sub-grid of
    /// cell centers (subdivisions = 1 gives one atom per cell). Empty cells are
    /// skipped.
    PointCloud to_point_cloud(int subdivisions = 1) const;

    /// Second moment of |x|^2 about the origin.
    double second_moment() const;

  private:
    int dimension_ = 1;
    std::vector<double> origin_;
    double cell_width_ = 1.0;
    std::vector<int> extents_;
    std::vector<double> values_;
};

struct EmpiricalApproximation {
    PointCloud measure;
    double cube_radius = 0.0;        // R, with target mass outside [-R, R]^N below eps/2
    int cubes_per_axis = 0;          // l
    std::size_t n = 0;               // total points
    std::size_t placed_in_cubes = 0; // sum_i floor(p_i n)
    std::size_t padding = 0;         // points in Q_{2R} \ Q_R
    /// (flat cube index, point count) for every occupied cube, ascending.
    std::vector<std::pair<std::size_t, std::size_t>> cube_counts;
};

struct EmpiricalOptions {
    double max_cube_radius = 1e6;
};

/// Empirical measure on n >= n_min distinct points within Levy-Prokhorov
/// distance eps of the target: capture 1 - eps/2 of the mass in Q_R, split
/// Q_R into l^N cubes of diameter below eps, put floor(p_i n) points in
/// each cube and pad the remainder in Q_{2R} \ Q_R. Deterministic in seed.
/// Throws MassEscapes if R would exceed options.max_cube_radius.
EmpiricalApproximation empirical_approximation(const GridDensity& target, double eps,
                                               std::size_t n_min, std::uint64_t seed,
                                               const EmpiricalOptions& options = {});
EmpiricalApproximation empirical_approximation(const PointCloud& target, double eps,
                                               std::size_t n_min, std::uint64_t seed,
                                               const EmpiricalOptions& options = {});

struct LevyProkhorovOptions {
    /// Cap on distinct corner coordinates per axis; larger coordinate sets
    /// are thinned to evenly spaced order statistics.
    std::size_t max_corners_1d = 2000;
    std::size_t max_corners_2d = 64;
};

/// Smallest eps in eps_grid such that mu(A) <= nu(A^eps) + eps and
/// nu(A) <= mu(A^eps) + eps for every box A with corners on the merged atom
/// coordinates, A^eps being the closed Euclidean eps-enlargement. +inf if no
/// grid value passes. An estimate over a restricted test family, not the
/// exact metric. Throws DimensionUnsupported for N > 2.
double levy_prokhorov_upper(const PointCloud& mu, const PointCloud& nu,
                            std::vector<double> eps_grid,
                            const LevyProkhorovOptions& options = {});

/// Uniform probability density on the ball B_radius(0), rasterized by cell
/// centers with cells_per_radius cells per radius, renormalized to mass 1.
GridDensity uniform_ball_density(double radius, int dimension, int cells_per_radius);

/// rho_n(x) = n^{-N} rho(x / n) for rho the normalized indicator of B_1(0).
GridDensity vanishing_ball_sequence(int n, int dimension, int cells_per_radius);

/// (p^N / pi^{N/2}) exp(-2 p^2 |x|^2) truncated at radius_sigmas / (2p) and
/// renormalized.
GridDensity gaussian_witness_density(double p, int dimension, int cells_per_sigma,
                                     double radius_sigmas);

/// exp(-|x|^2 / (2 sigma^2)) (1 + beta cos(xi x_1)), beta in [0, 1],
/// truncated at radius_sigmas * sigma and normalized. Its Fourier transform
/// concentrates near 0 and +-xi e_1.
GridDensity modulated_gaussian_density(double sigma, double xi, double beta, int dimension,
                                       double cell_width, double radius_sigmas);

}  // namespace nli
