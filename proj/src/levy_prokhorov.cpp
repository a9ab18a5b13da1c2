#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "nli/errors.hpp"
#include "nli/measure.hpp"

namespace nli {

namespace {

constexpr double kMassSlack = 1e-12;

// Enlargements use eps * (1 + 1e-12) so that distances equal to eps survive
// rounding.
double widen(double eps) { return eps * (1.0 + 1e-12) + 1e-15; }

std::vector<double> thin(std::vector<double> values, std::size_t cap) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() <= cap || cap < 2) return values;
    std::vector<double> out;
    out.reserve(cap);
    const double step = static_cast<double>(values.size() - 1) / static_cast<double>(cap - 1);
    for (std::size_t k = 0; k < cap; ++k)
        out.push_back(values[static_cast<std::size_t>(std::llround(step * static_cast<double>(k)))]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Sorted atoms of a 1-D measure with cumulative mass.
struct Line {
    std::vector<double> x;
    std::vector<double> cumulative;  // cumulative[i] = mass of atoms 0..i-1

    explicit Line(const PointCloud& m) {
        std::vector<std::size_t> order(m.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return m.point(a)[0] < m.point(b)[0]; });
        cumulative.push_back(0.0);
        for (std::size_t i : order) {
            x.push_back(m.point(i)[0]);
            cumulative.push_back(cumulative.back() + m.weight(i));
        }
    }

    // Mass in the closed interval [a, b].
    double closed(double a, double b) const {
        const auto lo = std::lower_bound(x.begin(), x.end(), a) - x.begin();
        const auto hi = std::upper_bound(x.begin(), x.end(), b) - x.begin();
        return hi > lo ? cumulative[hi] - cumulative[lo] : 0.0;
    }
};

bool passes_1d(const Line& tested, const Line& enlarged, const std::vector<double>& corners,
               double eps) {
    const double e = widen(eps);
    for (std::size_t i = 0; i < corners.size(); ++i) {
        for (std::size_t j = i; j < corners.size(); ++j) {
            const double mass = tested.closed(corners[i], corners[j]);
            if (mass <= eps) continue;
            if (mass > enlarged.closed(corners[i] - e, corners[j] + e) + eps + kMassSlack)
                return false;
        }
    }
    return true;
}

// Closed-box mass queries for bounds drawn from fixed sorted lists. A
// coordinate equal to bound k gets code 2k+1, one strictly between bounds
// k-1 and k gets code 2k, so the closed range [b_i, b_j] is codes 2i+1..2j+1.
class BoxCounter {
  public:
    BoxCounter(const PointCloud& m, std::vector<double> xb, std::vector<double> yb)
        : xb_(std::move(xb)), yb_(std::move(yb)), nx_(2 * xb_.size() + 1), ny_(2 * yb_.size() + 1),
          prefix_((nx_ + 1) * (ny_ + 1), 0.0) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto p = m.point(i);
            prefix_[(code(xb_, p[0]) + 1) * (ny_ + 1) + code(yb_, p[1]) + 1] += m.weight(i);
        }
        for (std::size_t a = 1; a <= nx_; ++a)
            for (std::size_t b = 1; b <= ny_; ++b)
                prefix_[a * (ny_ + 1) + b] += prefix_[(a - 1) * (ny_ + 1) + b] +
                                              prefix_[a * (ny_ + 1) + b - 1] -
                                              prefix_[(a - 1) * (ny_ + 1) + b - 1];
    }

    std::size_t x_bound(double v) const { return bound_index(xb_, v); }
    std::size_t y_bound(double v) const { return bound_index(yb_, v); }

    // Mass with x in [xb[i], xb[j]] and y in [yb[k], yb[l]].
    double closed(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        const std::size_t a0 = 2 * i + 1, a1 = 2 * j + 2, b0 = 2 * k + 1, b1 = 2 * l + 2;
        return prefix_[a1 * (ny_ + 1) + b1] - prefix_[a0 * (ny_ + 1) + b1] -
               prefix_[a1 * (ny_ + 1) + b0] + prefix_[a0 * (ny_ + 1) + b0];
    }

  private:
    static std::size_t code(const std::vector<double>& bounds, double v) {
        const auto k = static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), v) - bounds.begin());
        return k < bounds.size() && bounds[k] == v ? 2 * k + 1 : 2 * k;
    }
    static std::size_t bound_index(const std::vector<double>& bounds, double v) {
        return static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), v) - bounds.begin());
    }

    std::vector<double> xb_, yb_;
    std::size_t nx_, ny_;
    std::vector<double> prefix_;
};

std::vector<double> with_shifts(const std::vector<double>& corners, double e) {
    std::vector<double> out;
    out.reserve(3 * corners.size());
    for (double c : corners) {
        out.push_back(c - e);
        out.push_back(c);
        out.push_back(c + e);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool passes_2d(const PointCloud& tested, const PointCloud& enlarged, const std::vector<double>& xs,
               const std::vector<double>& ys, double eps) {
    const double e = widen(eps);
    const BoxCounter inner(tested, xs, ys);
    const BoxCounter outer(enlarged, with_shifts(xs, e), with_shifts(ys, e));

    const std::size_t kx = xs.size(), ky = ys.size();
    std::vector<std::size_t> xm(kx), x0(kx), xp(kx), ym(ky), y0(ky), yp(ky);
    for (std::size_t i = 0; i < kx; ++i) {
        xm[i] = outer.x_bound(xs[i] - e);
        x0[i] = outer.x_bound(xs[i]);
        xp[i] = outer.x_bound(xs[i] + e);
    }
    for (std::size_t k = 0; k < ky; ++k) {
        ym[k] = outer.y_bound(ys[k] - e);
        y0[k] = outer.y_bound(ys[k]);
        yp[k] = outer.y_bound(ys[k] + e);
    }

    // Quarter-disk masses at each corner: quadrant q has sign bits (sx, sy).
    std::vector<std::size_t> order(enlarged.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return enlarged.point(a)[0] < enlarged.point(b)[0]; });
    std::vector<double> sorted_x(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_x[i] = enlarged.point(order[i])[0];
    std::vector<double> quarter(kx * ky * 4, 0.0);
    const double e2 = e * e;
    for (std::size_t i = 0; i < kx; ++i) {
        const auto lo = std::lower_bound(sorted_x.begin(), sorted_x.end(), xs[i] - e) - sorted_x.begin();
        const auto hi = std::upper_bound(sorted_x.begin(), sorted_x.end(), xs[i] + e) - sorted_x.begin();
        for (auto s = lo; s < hi; ++s) {
            const std::size_t idx = order[static_cast<std::size_t>(s)];
            const auto p = enlarged.point(idx);
            const double dx = p[0] - xs[i];
            if (dx == 0.0) continue;
            for (std::size_t k = 0; k < ky; ++k) {
                const double dy = p[1] - ys[k];
                if (dy == 0.0 || dx * dx + dy * dy > e2) continue;
                const std::size_t q = (dx > 0.0 ? 1u : 0u) + (dy > 0.0 ? 2u : 0u);
                quarter[(i * ky + k) * 4 + q] += enlarged.weight(idx);
            }
        }
    }

    for (std::size_t i = 0; i < kx; ++i) {
        for (std::size_t j = i; j < kx; ++j) {
            for (std::size_t k = 0; k < ky; ++k) {
                for (std::size_t l = k; l < ky; ++l) {
                    const double mass = inner.closed(i, j, k, l);
                    if (mass <= eps) continue;
                    const double box = outer.closed(x0[i], x0[j], y0[k], y0[l]);
                    double grown = outer.closed(xm[i], xp[j], y0[k], y0[l]) +
                                   outer.closed(x0[i], x0[j], ym[k], yp[l]) - box;
                    grown += quarter[(i * ky + k) * 4 + 0] + quarter[(j * ky + k) * 4 + 1] +
                             quarter[(i * ky + l) * 4 + 2] + quarter[(j * ky + l) * 4 + 3];
                    if (mass > grown + eps + kMassSlack) return false;
                }
            }
        }
    }
    return true;
}

}  // namespace

double levy_prokhorov_upper(const PointCloud& mu, const PointCloud& nu, std::vector<double> eps_grid,
                            const LevyProkhorovOptions& options) {
    if (mu.dimension() != nu.dimension()) throw InvalidArgument("measures live in different dimensions");
    if (mu.dimension() > 2)
        throw DimensionUnsupported("Levy-Prokhorov estimate supports N <= 2 only");
    if (!mu.is_probability() || !nu.is_probability())
        throw InvalidArgument("Levy-Prokhorov estimate needs probability measures");
    std::sort(eps_grid.begin(), eps_grid.end());
    eps_grid.erase(std::remove_if(eps_grid.begin(), eps_grid.end(), [](double e) { return !(e > 0.0); }),
                   eps_grid.end());
    if (eps_grid.empty()) return std::numeric_limits<double>::infinity();

    std::function<bool(double)> passes;
    std::vector<double> xs_all, ys_all;
    for (const PointCloud* m : {&mu, &nu}) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            if (m->weight(i) <= 0.0) continue;
            xs_all.push_back(m->point(i)[0]);
            if (m->dimension() == 2) ys_all.push_back(m->point(i)[1]);
        }
    }

    if (mu.dimension() == 1) {
        const auto corners = thin(xs_all, options.max_corners_1d);
        passes = [a = Line(mu), b = Line(nu), corners](double eps) {
            return passes_1d(a, b, corners, eps) && passes_1d(b, a, corners, eps);
        };
    } else {
        const auto xs = thin(xs_all, options.max_corners_2d);
        const auto ys = thin(ys_all, options.max_corners_2d);
        passes = [&, xs, ys](double eps) {
            return passes_2d(mu, nu, xs, ys, eps) && passes_2d(nu, mu, xs, ys, eps);
        };
    }

    // The condition is monotone in eps, so bisect over the sorted grid.
    std::size_t lo = 0, hi = eps_grid.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (passes(eps_grid[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo < eps_grid.size() ? eps_grid[lo] : std::numeric_limits<double>::infinity();
}

}  // namespace nli
