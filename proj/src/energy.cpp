#include "nli/energy.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include <fftw3.h>

#include "nli/errors.hpp"
#include "nli/parallel.hpp"

namespace nli {

namespace {

constexpr std::size_t kRowsPerChunk = 32;

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return std::sqrt(s);
}

void require_same_dimension(const RadialPotential& p, int dimension) {
    if (p.dimension() != dimension)
        throw InvalidArgument("measure dimension does not match the potential dimension");
}

// Sum over i < j of w_i w_j W(|x_i - x_j|), chunked by rows and merged in
// row order.
double upper_pair_sum(const RadialPotential& p, const PointCloud& mu) {
    const std::size_t n = mu.size();
    const std::size_t chunks = (n + kRowsPerChunk - 1) / kRowsPerChunk;
    std::vector<Accumulator> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        Accumulator acc;
        const std::size_t end = std::min(n, (c + 1) * kRowsPerChunk);
        for (std::size_t i = c * kRowsPerChunk; i < end; ++i) {
            const double wi = mu.weight(i);
            if (wi == 0.0) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double wj = mu.weight(j);
                if (wj == 0.0) continue;
                acc.add(wi * wj * p(distance(mu.point(i), mu.point(j))));
            }
        }
        partial[c] = acc;
    });
    Accumulator total;
    for (const auto& a : partial) total.add(a);
    return total.value();
}

// Average of W(h |u - v|) for u, v uniform in the unit cell, with the two
// sample halves returned separately.
std::pair<double, double> self_cell_average(const RadialPotential& p, int dimension, double h,
                                            const GridEnergyOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t half = std::max<std::size_t>(1, options.self_cell_samples / 2);
    Accumulator first, second;
    for (std::size_t s = 0; s < 2 * half; ++s) {
        double r2 = 0.0;
        for (int d = 0; d < dimension; ++d) {
            const double t = unit(rng) - unit(rng);
            r2 += t * t;
        }
        (s < half ? first : second).add(p(h * std::sqrt(r2)));
    }
    return {first.value() / static_cast<double>(half), second.value() / static_cast<double>(half)};
}

double checked_self_average(const RadialPotential& p, int dimension, double h,
                            const GridEnergyOptions& options) {
    const auto [a, b] = self_cell_average(p, dimension, h, options);
    const double mean = 0.5 * (a + b);
    if (!std::isfinite(mean) || std::abs(a - b) > 0.25 * std::abs(mean) + 1e-12)
        throw QuadratureFailure("self-cell Monte Carlo estimate did not stabilize");
    return mean;
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Circular autocorrelation of the zero-padded cell values; entry for offset
// o lives at index o mod padded extent.
std::vector<double> autocorrelation(const GridDensity& rho, std::vector<int>& padded) {
    const int dim = rho.dimension();
    padded.assign(dim, 0);
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
        padded[d] = 2 * rho.extents()[d];
        total *= static_cast<std::size_t>(padded[d]);
    }
    const std::size_t last = static_cast<std::size_t>(padded[dim - 1]);
    const std::size_t complex_count = total / last * (last / 2 + 1);

    double* real = fftw_alloc_real(total);
    fftw_complex* spectrum = fftw_alloc_complex(complex_count);
    fftw_plan forward, backward;
    {
        std::lock_guard lock(fftw_planner_mutex());
        forward = fftw_plan_dft_r2c(dim, padded.data(), real, spectrum, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r(dim, padded.data(), spectrum, real, FFTW_ESTIMATE);
    }
    std::fill(real, real + total, 0.0);
    for (std::size_t flat = 0; flat < rho.cell_count(); ++flat) {
        const auto idx = rho.cell_index(flat);
        std::size_t out = 0;
        for (int d = 0; d < dim; ++d) out = out * static_cast<std::size_t>(padded[d]) + static_cast<std::size_t>(idx[d]);
        real[out] = rho.values()[flat];
    }
    fftw_execute(forward);
    for (std::size_t k = 0; k < complex_count; ++k) {
        spectrum[k][0] = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];
        spectrum[k][1] = 0.0;
    }
    fftw_execute(backward);
    std::vector<double> out(real, real + total);
    for (double& v : out) v /= static_cast<double>(total);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    fftw_free(real);
    fftw_free(spectrum);
    return out;
}

EnergyReport grid_direct(const RadialPotential& p, const GridDensity& rho, double self_avg) {
    const int dim = rho.dimension();
    std::vector<std::array<double, 3>> centers;
    std::vector<double> values;
    for (std::size_t flat = 0; flat < rho.cell_count(); ++flat) {
        if (rho.values()[flat] <= 0.0) continue;
        centers.push_back(rho.cell_center(flat));
        values.push_back(rho.values()[flat]);
    }
    const std::size_t m = values.size();
    const std::size_t chunks = (m + kRowsPerChunk - 1) / kRowsPerChunk;
    std::vector<Accumulator> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        Accumulator acc;
        const std::size_t end = std::min(m, (c + 1) * kRowsPerChunk);
        for (std::size_t a = c * kRowsPerChunk; a < end; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                double r2 = 0.0;
                for (int d = 0; d < dim; ++d) {
                    const double t = centers[a][d] - centers[b][d];
                    r2 += t * t;
                }
                acc.add(values[a] * values[b] * p(std::sqrt(r2)));
            }
        }
        partial[c] = acc;
    });
    Accumulator off, self;
    for (const auto& a : partial) off.add(a);
    for (double v : values) self.add(v * v);
    const double vol2 = rho.cell_volume() * rho.cell_volume();

    EnergyReport r;
    r.offdiagonal = 2.0 * off.value() * vol2;
    r.diagonal_contribution = self.value() * self_avg * vol2;
    r.value = r.offdiagonal + r.diagonal_contribution;
    r.pair_count = m * (m - 1) / 2;
    return r;
}

EnergyReport grid_fast(const RadialPotential& p, const GridDensity& rho, double self_avg) {
    const int dim = rho.dimension();
    const double h = rho.cell_width();
    std::vector<int> padded;
    const auto corr = autocorrelation(rho, padded);

    std::size_t max_q = 0;
    for (int d = 0; d < dim; ++d) {
        const auto e = static_cast<std::size_t>(rho.extents()[d]);
        max_q += (e - 1) * (e - 1);
    }
    std::vector<double> cache(max_q + 1, std::numeric_limits<double>::quiet_NaN());

    Accumulator off;
    std::array<int, 3> o{};
    const std::size_t total = corr.size();
    for (std::size_t flat = 1; flat < total; ++flat) {
        std::size_t rest = flat;
        std::size_t q = 0;
        bool valid = true;
        for (int d = dim - 1; d >= 0; --d) {
            const int size = padded[d];
            int k = static_cast<int>(rest % static_cast<std::size_t>(size));
            rest /= static_cast<std::size_t>(size);
            if (k >= size / 2) k -= size;
            o[d] = k;
            if (std::abs(k) >= rho.extents()[d]) valid = false;
            q += static_cast<std::size_t>(k * k);
        }
        if (!valid || corr[flat] == 0.0) continue;
        double& w = cache[q];
        if (std::isnan(w)) w = p(h * std::sqrt(static_cast<double>(q)));
        off.add(corr[flat] * w);
    }
    const double vol2 = rho.cell_volume() * rho.cell_volume();
    EnergyReport r;
    r.offdiagonal = off.value() * vol2;
    r.diagonal_contribution = corr[0] * self_avg * vol2;
    r.value = r.offdiagonal + r.diagonal_contribution;
    std::size_t occupied = 0;
    for (double v : rho.values()) occupied += v > 0.0 ? 1 : 0;
    r.pair_count = occupied * (occupied - 1) / 2;
    return r;
}

}  // namespace

EnergyReport energy_pointcloud(const RadialPotential& p, const PointCloud& mu, bool include_diagonal) {
    require_same_dimension(p, mu.dimension());
    EnergyReport r;
    r.potential_id = p.describe();
    const std::size_t n = mu.size();
    r.pair_count = n * (n - (n > 0 ? 1 : 0)) / 2;

    r.offdiagonal = 2.0 * upper_pair_sum(p, mu);
    if (include_diagonal) {
        const double w0 = p(0.0);
        Accumulator sq;
        for (double w : mu.weights()) sq.add(w * w);
        const double s = sq.value();
        r.diagonal_contribution = s > 0.0 ? s * w0 : 0.0;
    }
    r.value = r.offdiagonal + r.diagonal_contribution;
    return r;
}

EnergyReport energy_grid(const RadialPotential& p, const GridDensity& rho, GridQuadrature mode,
                         const GridEnergyOptions& options) {
    require_same_dimension(p, rho.dimension());
    const double self_avg = checked_self_average(p, rho.dimension(), rho.cell_width(), options);
    EnergyReport r = mode == GridQuadrature::Direct ? grid_direct(p, rho, self_avg)
                                                    : grid_fast(p, rho, self_avg);
    r.potential_id = p.describe();
    return r;
}

double bilinear_form(const RadialPotential& p, const PointCloud& mu, const PointCloud& nu) {
    require_same_dimension(p, mu.dimension());
    require_same_dimension(p, nu.dimension());
    const std::size_t n = mu.size();
    const std::size_t chunks = (n + kRowsPerChunk - 1) / kRowsPerChunk;
    std::vector<Accumulator> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        Accumulator acc;
        const std::size_t end = std::min(n, (c + 1) * kRowsPerChunk);
        for (std::size_t i = c * kRowsPerChunk; i < end; ++i) {
            if (mu.weight(i) == 0.0) continue;
            for (std::size_t j = 0; j < nu.size(); ++j) {
                if (nu.weight(j) == 0.0) continue;
                acc.add(mu.weight(i) * nu.weight(j) * p(distance(mu.point(i), nu.point(j))));
            }
        }
        partial[c] = acc;
    });
    Accumulator total;
    for (const auto& a : partial) total.add(a);
    return 2.0 * total.value();
}

double per_pair_energy(const RadialPotential& p, const PointCloud& config) {
    require_same_dimension(p, config.dimension());
    const std::size_t n = config.size();
    if (n == 0) return 0.0;
    // Equal weights 1/n give w_i w_j = 1/n^2.
    const PointCloud unit(config.dimension(), config.coordinates(), std::vector<double>(n, 1.0));
    return upper_pair_sum(p, unit) / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace nli
