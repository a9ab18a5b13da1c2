#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "nli/measure.hpp"
#include "nli/potential.hpp"

namespace nli {

struct EnergyReport {
    /// E = offdiagonal + diagonal_contribution whenever both are finite.
    double value = 0.0;
    double offdiagonal = 0.0;
    /// sum_i w_i^2 W(0) for point clouds (zero when the diagonal is excluded);
    /// the self-cell term for grids.
    double diagonal_contribution = 0.0;
    std::size_t pair_count = 0;
    std::string potential_id;
};

/// E(mu) = sum_i sum_j w_i w_j W(|x_i - x_j|). Without the diagonal only the
/// i != j terms are kept. An infinite W(0) with some positive weight makes
/// the value +inf when the diagonal is included.
EnergyReport energy_pointcloud(const RadialPotential& p, const PointCloud& mu,
                               bool include_diagonal = true);

enum class GridQuadrature { Direct, RadialFast };

struct GridEnergyOptions {
    std::size_t self_cell_samples = 512;
    std::uint64_t seed = 0x5eed;
};

/// Energy of a piecewise-constant density: cell-center double sum with the
/// self-cell term replaced by a seeded Monte Carlo cell average of W.
/// RadialFast forms the density autocorrelation by FFT and evaluates W once
/// per distinct squared integer offset. Throws QuadratureFailure when the
/// self-cell estimate is not stable between sample halves.
EnergyReport energy_grid(const RadialPotential& p, const GridDensity& rho,
                         GridQuadrature mode = GridQuadrature::Direct,
                         const GridEnergyOptions& options = {});

/// B[mu, nu] = 2 sum_i sum_j w_i v_j W(|x_i - y_j|).
double bilinear_form(const RadialPotential& p, const PointCloud& mu, const PointCloud& nu);

/// Left side of the stability inequality for equal-weight configurations:
/// (1/n^2) sum_{i<j} W(|x_i - x_j|).
double per_pair_energy(const RadialPotential& p, const PointCloud& config);

}  // namespace nli
