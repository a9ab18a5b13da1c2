#include "nli/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "nli/errors.hpp"
#include "nli/potential.hpp"

namespace nli {

namespace {

void require_grid_dimension(int dimension) {
    if (dimension < 1 || dimension > 3)
        throw DimensionUnsupported("grid densities support dimensions 1 to 3");
}

std::size_t ipow(std::size_t base, int exponent) {
    std::size_t out = 1;
    for (int i = 0; i < exponent; ++i) out *= base;
    return out;
}

// Additive recurrence with the generalized golden ratio of dimension N;
// consecutive terms never coincide.
std::array<double, 3> kronecker_step(int dimension) {
    double phi = 2.0;
    for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / (dimension + 1));
    std::array<double, 3> alpha{};
    for (int d = 0; d < dimension; ++d) alpha[d] = std::fmod(std::pow(1.0 / phi, d + 1), 1.0);
    return alpha;
}

std::array<double, 3> seeded_offset(std::uint64_t seed, std::uint64_t stream, int dimension) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<double, 3> u{};
    for (int d = 0; d < dimension; ++d) u[d] = unit(rng);
    return u;
}

double frac(double x) { return x - std::floor(x); }

struct CubeLayout {
    int dimension;
    double radius;
    int per_axis;
    double side() const { return 2.0 * radius / per_axis; }

    int axis_index(double x) const {
        const int i = static_cast<int>(std::floor((x + radius) / side()));
        return std::clamp(i, 0, per_axis - 1);
    }
};

// Shared tail of both overloads: point counts, placement and padding.
EmpiricalApproximation place_points(const CubeLayout& layout,
                                    const std::map<std::size_t, double>& cube_mass, double eps,
                                    std::size_t n_min, std::uint64_t seed) {
    const int dim = layout.dimension;
    const std::size_t cubes = ipow(static_cast<std::size_t>(layout.per_axis), dim);
    // Smallest n >= n_min with l^N / n < eps / 2.
    const auto floor_n = static_cast<std::size_t>(std::floor(2.0 * static_cast<double>(cubes) / eps));
    const std::size_t n = std::max(n_min, floor_n + 1);

    EmpiricalApproximation out;
    out.cube_radius = layout.radius;
    out.cubes_per_axis = layout.per_axis;
    out.n = n;

    std::vector<double> coords;
    coords.reserve(n * static_cast<std::size_t>(dim));
    const auto alpha = kronecker_step(dim);
    const double side = layout.side();

    std::size_t placed = 0;
    for (const auto& [flat, mass] : cube_mass) {
        auto count = static_cast<std::size_t>(std::floor(mass * static_cast<double>(n) + 1e-9));
        count = std::min(count, n - placed);
        if (count == 0) continue;
        std::array<double, 3> lower{};
        std::size_t rest = flat;
        for (int d = dim - 1; d >= 0; --d) {
            lower[d] = -layout.radius + side * static_cast<double>(rest % layout.per_axis);
            rest /= layout.per_axis;
        }
        const auto offset = seeded_offset(seed, flat, dim);
        for (std::size_t k = 1; k <= count; ++k)
            for (int d = 0; d < dim; ++d)
                coords.push_back(lower[d] + side * frac(offset[d] + static_cast<double>(k) * alpha[d]));
        out.cube_counts.emplace_back(flat, count);
        placed += count;
    }
    out.placed_in_cubes = placed;
    out.padding = n - placed;

    // Padding inside the slab x_1 in [1.25R, 1.75R) of Q_{2R} \ Q_R.
    const auto offset = seeded_offset(seed, cubes + 1, dim);
    for (std::size_t k = 1; k <= out.padding; ++k) {
        for (int d = 0; d < dim; ++d) {
            const double u = frac(offset[d] + static_cast<double>(k) * alpha[d]);
            coords.push_back(d == 0 ? layout.radius * (1.25 + 0.5 * u)
                                    : -layout.radius + 2.0 * layout.radius * u);
        }
    }
    out.measure = PointCloud::empirical(dim, std::move(coords));
    return out;
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("eps must lie in (0, 1/2)");
}

int cubes_per_axis(int dimension, double radius, double eps) {
    return static_cast<int>(std::floor(std::sqrt(static_cast<double>(dimension)) * 2.0 * radius / eps)) + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(int dimension, std::vector<double> coordinates, std::vector<double> weights)
    : dimension_(dimension), coordinates_(std::move(coordinates)), weights_(std::move(weights)) {
    if (dimension_ < 1) throw InvalidArgument("dimension must be positive");
    if (coordinates_.size() != weights_.size() * static_cast<std::size_t>(dimension_))
        throw InvalidArgument("coordinate count does not match weights and dimension");
    for (double w : weights_)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw InvalidArgument("weights must be finite and nonnegative");
    for (double x : coordinates_)
        if (!std::isfinite(x)) throw InvalidArgument("coordinates must be finite");
}

PointCloud PointCloud::empirical(int dimension, std::vector<double> coordinates) {
    if (dimension < 1) throw InvalidArgument("dimension must be positive");
    const std::size_t n = coordinates.size() / static_cast<std::size_t>(dimension);
    std::vector<double> weights(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    return PointCloud(dimension, std::move(coordinates), std::move(weights));
}

double PointCloud::total_mass() const {
    double sum = 0.0, c = 0.0;
    for (double w : weights_) {
        const double y = w - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

bool PointCloud::is_probability() const { return std::abs(total_mass() - 1.0) <= 1e-12; }

bool PointCloud::has_distinct_points() const {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        const auto pa = point(a), pb = point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i)
        if (!less(order[i - 1], order[i])) return false;
    return true;
}

PointCloud PointCloud::translated(std::span<const double> shift) const {
    if (shift.size() != static_cast<std::size_t>(dimension_))
        throw InvalidArgument("shift dimension mismatch");
    std::vector<double> coords = coordinates_;
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += shift[i % dimension_];
    return PointCloud(dimension_, std::move(coords), weights_);
}

PointCloud PointCloud::scaled(double factor) const {
    if (!(factor >= 0.0)) throw InvalidArgument("scale factor must be nonnegative");
    std::vector<double> weights = weights_;
    for (double& w : weights) w *= factor;
    return PointCloud(dimension_, coordinates_, std::move(weights));
}

PointCloud operator+(const PointCloud& lhs, const PointCloud& rhs) {
    if (lhs.dimension_ != rhs.dimension_) throw InvalidArgument("dimension mismatch in sum");
    std::vector<double> coords = lhs.coordinates_;
    coords.insert(coords.end(), rhs.coordinates_.begin(), rhs.coordinates_.end());
    std::vector<double> weights = lhs.weights_;
    weights.insert(weights.end(), rhs.weights_.begin(), rhs.weights_.end());
    return PointCloud(lhs.dimension_, std::move(coords), std::move(weights));
}

// ---------------------------------------------------------------------------
// GridDensity

GridDensity::GridDensity(int dimension, std::vector<double> origin, double cell_width,
                         std::vector<int> extents, std::vector<double> values)
    : dimension_(dimension),
      origin_(std::move(origin)),
      cell_width_(cell_width),
      extents_(std::move(extents)),
      values_(std::move(values)) {
    require_grid_dimension(dimension_);
    if (origin_.size() != static_cast<std::size_t>(dimension_) ||
        extents_.size() != static_cast<std::size_t>(dimension_))
        throw InvalidArgument("grid origin and extents must have one entry per axis");
    if (!(cell_width_ > 0.0)) throw InvalidArgument("cell width must be positive");
    std::size_t cells = 1;
    for (int e : extents_) {
        if (e < 1) throw InvalidArgument("grid extents must be positive");
        cells *= static_cast<std::size_t>(e);
    }
    if (values_.size() != cells) throw InvalidArgument("cell value count does not match extents");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidArgument("cell values must be finite and nonnegative");
}

double GridDensity::cell_volume() const { return std::pow(cell_width_, dimension_); }

std::array<int, 3> GridDensity::cell_index(std::size_t flat) const {
    std::array<int, 3> idx{};
    for (int d = dimension_ - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % static_cast<std::size_t>(extents_[d]));
        flat /= static_cast<std::size_t>(extents_[d]);
    }
    return idx;
}

std::array<double, 3> GridDensity::cell_center(std::size_t flat) const {
    const auto idx = cell_index(flat);
    std::array<double, 3> c{};
    for (int d = 0; d < dimension_; ++d) c[d] = origin_[d] + cell_width_ * (idx[d] + 0.5);
    return c;
}

double GridDensity::mass() const {
    double sum = 0.0, c = 0.0;
    for (double v : values_) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum * cell_volume();
}

GridDensity GridDensity::normalized() const {
    const double m = mass();
    if (!(m > 0.0)) throw InvalidArgument("cannot normalize a grid density with zero mass");
    std::vector<double> values = values_;
    for (double& v : values) v /= m;
    return GridDensity(dimension_, origin_, cell_width_, extents_, std::move(values));
}

PointCloud GridDensity::to_point_cloud(int subdivisions) const {
    if (subdivisions < 1) throw InvalidArgument("subdivisions must be positive");
    const std::size_t sub = ipow(static_cast<std::size_t>(subdivisions), dimension_);
    const double step = cell_width_ / subdivisions;
    const double volume = cell_volume();
    std::vector<double> coords, weights;
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
        if (values_[flat] <= 0.0) continue;
        const auto idx = cell_index(flat);
        const double w = values_[flat] * volume / static_cast<double>(sub);
        for (std::size_t s = 0; s < sub; ++s) {
            std::size_t rest = s;
            for (int d = 0; d < dimension_; ++d) {
                const auto k = static_cast<double>(rest % static_cast<std::size_t>(subdivisions));
                rest /= static_cast<std::size_t>(subdivisions);
                coords.push_back(origin_[d] + cell_width_ * idx[d] + step * (k + 0.5));
            }
            weights.push_back(w);
        }
    }
    return PointCloud(dimension_, std::move(coords), std::move(weights));
}

double GridDensity::second_moment() const {
    double sum = 0.0;
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
        const auto c = cell_center(flat);
        double r2 = 0.0;
        for (int d = 0; d < dimension_; ++d) r2 += c[d] * c[d];
        sum += values_[flat] * r2;
    }
    return sum * cell_volume();
}

// ---------------------------------------------------------------------------
// Empirical approximation

EmpiricalApproximation empirical_approximation(const GridDensity& target, double eps,
                                               std::size_t n_min, std::uint64_t seed,
                                               const EmpiricalOptions& options) {
    check_eps(eps);
    if (n_min < 1) throw InvalidArgument("n_min must be positive");
    if (std::abs(target.mass() - 1.0) > 1e-9)
        throw InvalidArgument("empirical approximation needs a probability target");
    const int dim = target.dimension();
    const double h = target.cell_width();
    const double volume = target.cell_volume();

    // Sup-norm extent of each occupied cell; R is the smallest extent leaving
    // less than eps/2 of the mass outside Q_R.
    std::vector<std::pair<double, double>> extent_mass;
    for (std::size_t flat = 0; flat < target.cell_count(); ++flat) {
        const double v = target.values()[flat];
        if (v <= 0.0) continue;
        const auto idx = target.cell_index(flat);
        double extent = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double lo = target.origin()[d] + h * idx[d];
            extent = std::max({extent, std::abs(lo), std::abs(lo + h)});
        }
        extent_mass.emplace_back(extent, v * volume);
    }
    std::sort(extent_mass.begin(), extent_mass.end());
    double outside = 0.0;
    for (const auto& em : extent_mass) outside += em.second;
    double radius = 0.0;
    for (const auto& [extent, m] : extent_mass) {
        if (outside < 0.5 * eps) break;
        radius = extent;
        outside -= m;
    }
    if (radius > options.max_cube_radius)
        throw MassEscapes("no cube of radius below the search bound captures 1 - eps/2 of the mass");
    if (radius == 0.0) radius = eps;

    const CubeLayout layout{dim, radius, cubes_per_axis(dim, radius, eps)};
    const double side = layout.side();

    // Exact cube masses from the overlap of each grid cell with the cubes.
    std::map<std::size_t, double> cube_mass;
    for (std::size_t flat = 0; flat < target.cell_count(); ++flat) {
        const double v = target.values()[flat];
        if (v <= 0.0) continue;
        const auto idx = target.cell_index(flat);
        std::array<int, 3> first{}, last{};
        std::array<double, 3> lo{};
        bool inside = true;
        for (int d = 0; d < dim; ++d) {
            lo[d] = target.origin()[d] + h * idx[d];
            const double a = std::max(lo[d], -radius), b = std::min(lo[d] + h, radius);
            if (!(b > a)) {
                inside = false;
                break;
            }
            first[d] = layout.axis_index(a);
            last[d] = layout.axis_index(std::nextafter(b, a));
        }
        if (!inside) continue;
        std::array<int, 3> cur = first;
        while (true) {
            double overlap = 1.0;
            std::size_t cube = 0;
            for (int d = 0; d < dim; ++d) {
                const double cube_lo = -radius + side * cur[d];
                const double a = std::max(lo[d], cube_lo), b = std::min(lo[d] + h, cube_lo + side);
                overlap *= std::max(0.0, b - a);
                cube = cube * static_cast<std::size_t>(layout.per_axis) + static_cast<std::size_t>(cur[d]);
            }
            if (overlap > 0.0) cube_mass[cube] += v * overlap;
            int d = dim - 1;
            while (d >= 0 && cur[d] == last[d]) {
                cur[d] = first[d];
                --d;
            }
            if (d < 0) break;
            ++cur[d];
        }
    }
    return place_points(layout, cube_mass, eps, n_min, seed);
}

EmpiricalApproximation empirical_approximation(const PointCloud& target, double eps,
                                               std::size_t n_min, std::uint64_t seed,
                                               const EmpiricalOptions& options) {
    check_eps(eps);
    if (n_min < 1) throw InvalidArgument("n_min must be positive");
    if (!target.is_probability())
        throw InvalidArgument("empirical approximation needs a probability target");
    const int dim = target.dimension();

    std::vector<std::pair<double, double>> extent_mass;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target.weight(i) <= 0.0) continue;
        double extent = 0.0;
        for (double x : target.point(i)) extent = std::max(extent, std::abs(x));
        extent_mass.emplace_back(extent, target.weight(i));
    }
    std::sort(extent_mass.begin(), extent_mass.end());
    double outside = 1.0;
    double radius = 0.0;
    for (const auto& [extent, m] : extent_mass) {
        if (outside < 0.5 * eps) break;
        radius = extent;
        outside -= m;
    }
    if (radius > options.max_cube_radius)
        throw MassEscapes("no cube of radius below the search bound captures 1 - eps/2 of the mass");
    if (radius == 0.0) radius = eps;

    const CubeLayout layout{dim, radius, cubes_per_axis(dim, radius, eps)};
    std::map<std::size_t, double> cube_mass;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const auto x = target.point(i);
        bool inside = true;
        std::size_t cube = 0;
        for (int d = 0; d < dim; ++d) {
            if (std::abs(x[d]) > radius) inside = false;
            cube = cube * static_cast<std::size_t>(layout.per_axis) +
                   static_cast<std::size_t>(layout.axis_index(x[d]));
        }
        if (inside && target.weight(i) > 0.0) cube_mass[cube] += target.weight(i);
    }
    return place_points(layout, cube_mass, eps, n_min, seed);
}

// ---------------------------------------------------------------------------
// Rasterized witnesses

namespace {

template <class Density>
GridDensity rasterize(int dimension, double half_width, double cell_width, Density density) {
    require_grid_dimension(dimension);
    const int per_axis = std::max(1, static_cast<int>(std::ceil(2.0 * half_width / cell_width - 1e-9)));
    const double origin = -0.5 * per_axis * cell_width;
    std::vector<int> extents(dimension, per_axis);
    const std::size_t cells = ipow(static_cast<std::size_t>(per_axis), dimension);
    GridDensity shape(dimension, std::vector<double>(dimension, origin), cell_width, extents,
                      std::vector<double>(cells, 0.0));
    std::vector<double> values(cells);
    for (std::size_t flat = 0; flat < cells; ++flat) values[flat] = density(shape.cell_center(flat));
    return GridDensity(dimension, std::vector<double>(dimension, origin), cell_width, extents,
                       std::move(values))
        .normalized();
}

double norm(const std::array<double, 3>& x, int dimension) {
    double s = 0.0;
    for (int d = 0; d < dimension; ++d) s += x[d] * x[d];
    return std::sqrt(s);
}

}  // namespace

GridDensity uniform_ball_density(double radius, int dimension, int cells_per_radius) {
    if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
    if (cells_per_radius < 1) throw InvalidArgument("cells_per_radius must be positive");
    const double height = 1.0 / (ball_volume(dimension) * std::pow(radius, dimension));
    return rasterize(dimension, radius, radius / cells_per_radius,
                     [&](const std::array<double, 3>& c) {
                         return norm(c, dimension) < radius ? height : 0.0;
                     });
}

GridDensity vanishing_ball_sequence(int n, int dimension, int cells_per_radius) {
    if (n < 1) throw InvalidArgument("vanishing sequence index must be >= 1");
    return uniform_ball_density(static_cast<double>(n), dimension, cells_per_radius);
}

GridDensity gaussian_witness_density(double p, int dimension, int cells_per_sigma,
                                     double radius_sigmas) {
    if (!(p > 0.0)) throw InvalidArgument("Gaussian witness needs p > 0");
    if (cells_per_sigma < 1 || !(radius_sigmas > 0.0))
        throw InvalidArgument("Gaussian witness needs positive resolution and radius");
    const double sigma = 0.5 / p;
    const double height = std::pow(p, dimension) / std::pow(std::numbers::pi, 0.5 * dimension);
    return rasterize(dimension, radius_sigmas * sigma, sigma / cells_per_sigma,
                     [&](const std::array<double, 3>& c) {
                         const double r = norm(c, dimension);
                         return height * std::exp(-2.0 * p * p * r * r);
                     });
}

GridDensity modulated_gaussian_density(double sigma, double xi, double beta, int dimension,
                                       double cell_width, double radius_sigmas) {
    if (!(sigma > 0.0) || !(cell_width > 0.0) || !(radius_sigmas > 0.0))
        throw InvalidArgument("modulated Gaussian needs positive sigma, cell width and radius");
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("modulation depth must lie in [0, 1]");
    return rasterize(dimension, radius_sigmas * sigma, cell_width,
                     [&](const std::array<double, 3>& c) {
                         const double r = norm(c, dimension);
                         return std::exp(-0.5 * r * r / (sigma * sigma)) *
                                (1.0 + beta * std::cos(xi * c[0]));
                     });
}

}  // namespace nli
