#include "nli/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "nli/energy.hpp"
#include "nli/errors.hpp"
#include "nli/parallel.hpp"

namespace nli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinSeparation = 1e-10;
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr double kCoalesceRadius = 1e-4;
constexpr std::size_t kRowsPerChunk = 16;

double pair_distance(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return std::sqrt(s);
}

struct EnergyTerms {
    double value = 0.0;
    double l1 = 0.0;
};

EnergyTerms energy_terms(const RadialPotential& p, const std::vector<double>& x) {
    const int dim = p.dimension();
    const std::size_t n = x.size() / static_cast<std::size_t>(dim);
    const std::size_t chunks = (n + kRowsPerChunk - 1) / kRowsPerChunk;
    std::vector<Accumulator> sums(chunks), l1s(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kRowsPerChunk);
        for (std::size_t i = c * kRowsPerChunk; i < end; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double w = p(pair_distance(&x[i * dim], &x[j * dim], dim));
                sums[c].add(w);
                l1s[c].add(std::abs(w));
            }
    });
    Accumulator s, l;
    for (std::size_t c = 0; c < chunks; ++c) {
        s.add(sums[c]);
        l.add(l1s[c]);
    }
    const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n));
    return {scale * s.value(), scale * l.value()};
}

void recentre(std::vector<double>& x, int dim) {
    const std::size_t n = x.size() / static_cast<std::size_t>(dim);
    for (int d = 0; d < dim; ++d) {
        Accumulator c;
        for (std::size_t i = 0; i < n; ++i) c.add(x[i * dim + d]);
        const double mean = c.value() / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) x[i * dim + d] -= mean;
    }
}

double norm2(const std::vector<double>& v) {
    Accumulator a;
    for (double t : v) a.add(t * t);
    return a.value();
}

struct Split {
    double fraction = 1.0;
    double gap = 0.0;
    double ratio = 0.0;
};

// Lloyd's 2-means seeded with the farthest pair.
Split two_means(const std::vector<double>& x, int dim, std::size_t far_i, std::size_t far_j) {
    const std::size_t n = x.size() / static_cast<std::size_t>(dim);
    std::vector<double> ca(x.begin() + far_i * dim, x.begin() + (far_i + 1) * dim);
    std::vector<double> cb(x.begin() + far_j * dim, x.begin() + (far_j + 1) * dim);
    std::vector<int> label(n, 0);
    for (int it = 0; it < 50; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int l = pair_distance(&x[i * dim], ca.data(), dim) <=
                                  pair_distance(&x[i * dim], cb.data(), dim)
                              ? 0
                              : 1;
            changed |= l != label[i];
            label[i] = l;
        }
        if (!changed && it > 0) break;
        std::vector<double> sa(dim, 0.0), sb(dim, 0.0);
        std::size_t na = 0, nb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = label[i] == 0 ? sa : sb;
            (label[i] == 0 ? na : nb)++;
            for (int d = 0; d < dim; ++d) s[d] += x[i * dim + d];
        }
        if (na == 0 || nb == 0) break;
        for (int d = 0; d < dim; ++d) {
            ca[d] = sa[d] / static_cast<double>(na);
            cb[d] = sb[d] / static_cast<double>(nb);
        }
    }
    std::size_t na = 0;
    for (int l : label) na += l == 0 ? 1 : 0;
    Split s;
    if (na == 0 || na == n) return s;
    double gap = kInf, diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = pair_distance(&x[i * dim], &x[j * dim], dim);
            if (label[i] != label[j])
                gap = std::min(gap, d);
            else
                diam = std::max(diam, d);
        }
    s.fraction = static_cast<double>(std::min(na, n - na)) / static_cast<double>(n);
    s.gap = gap;
    s.ratio = diam > 0.0 ? gap / diam : (gap > 0.0 ? kInf : 0.0);
    return s;
}

Iterate describe(const std::vector<double>& x, int dim, double range) {
    const std::size_t n = x.size() / static_cast<std::size_t>(dim);
    Iterate it;
    std::vector<double> radii(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += x[i * dim + d] * x[i * dim + d];
        radii[i] = std::sqrt(r2);
    }
    std::sort(radii.begin(), radii.end());
    const auto q = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n)));
    it.q90_radius = radii[std::max<std::size_t>(q, 1) - 1];

    std::vector<double> nn(n, kInf);
    std::vector<std::size_t> in_ball(n, 1);
    std::size_t far_i = 0, far_j = n > 1 ? 1 : 0;
    double far = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = pair_distance(&x[i * dim], &x[j * dim], dim);
            nn[i] = std::min(nn[i], d);
            nn[j] = std::min(nn[j], d);
            if (d <= range) {
                ++in_ball[i];
                ++in_ball[j];
            }
            if (d > far) {
                far = d;
                far_i = i;
                far_j = j;
            }
        }
    it.max_pair_distance = far;
    std::sort(nn.begin(), nn.end());
    it.median_nn_distance =
        n % 2 == 1 ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
    it.max_ball_mass = static_cast<double>(*std::max_element(in_ball.begin(), in_ball.end())) /
                       static_cast<double>(n);
    const Split s = two_means(x, dim, far_i, far_j);
    it.split_fraction = s.fraction;
    it.split_gap = s.gap;
    it.split_gap_ratio = s.ratio;
    return it;
}

std::vector<double> unit_gaussian_direction(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& t : v) {
            t = g(rng);
            n2 += t * t;
        }
    } while (n2 == 0.0);
    for (auto& t : v) t /= std::sqrt(n2);
    return v;
}

void fill_ball(std::vector<double>& out, std::size_t count, double radius, double shift,
               int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < count; ++k) {
        const auto dir = unit_gaussian_direction(rng, dim);
        const double r = radius * std::pow(u(rng), 1.0 / dim);
        for (int d = 0; d < dim; ++d) out.push_back(r * dir[d] + (d == 0 ? shift : 0.0));
    }
}

// Groups of particles closer than delta (single linkage) moved to their
// centroids. Returns false when no pair is that close.
bool coalesce(std::vector<double>& x, int dim, double delta) {
    const std::size_t n = x.size() / static_cast<std::size_t>(dim);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (pair_distance(&x[i * dim], &x[j * dim], dim) < delta) {
                const std::size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
                any = true;
            }
    if (!any) return false;
    std::vector<double> sum(n * dim, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        ++count[r];
        for (int d = 0; d < dim; ++d) sum[r * dim + d] += x[i * dim + d];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        for (int d = 0; d < dim; ++d) x[i * dim + d] = sum[r * dim + d] / static_cast<double>(count[r]);
    }
    return true;
}

}  // namespace

std::string to_string(Init init) {
    switch (init) {
        case Init::Lattice: return "lattice";
        case Init::RandomBall: return "random_ball";
        case Init::TwoCluster: return "two_cluster";
    }
    return "?";
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Tight: return "tight";
        case Classification::Vanishing: return "vanishing";
        case Classification::Dichotomy: return "dichotomy";
        case Classification::Undecided: return "undecided";
    }
    return "?";
}

Init parse_init(const std::string& name) {
    if (name == "lattice") return Init::Lattice;
    if (name == "random_ball") return Init::RandomBall;
    if (name == "two_cluster") return Init::TwoCluster;
    throw InvalidArgument("unknown initialization '" + name + "'");
}

double particle_energy(const RadialPotential& p, const std::vector<double>& coords,
                       std::vector<double>* gradient) {
    const int dim = p.dimension();
    const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
    const double value = energy_terms(p, coords).value;
    if (gradient) {
        gradient->assign(coords.size(), 0.0);
        const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n));
        const std::size_t chunks = (n + kRowsPerChunk - 1) / kRowsPerChunk;
        parallel_for(chunks, [&](std::size_t c) {
            const std::size_t end = std::min(n, (c + 1) * kRowsPerChunk);
            std::vector<Accumulator> g(dim);
            for (std::size_t i = c * kRowsPerChunk; i < end; ++i) {
                for (auto& a : g) a = Accumulator{};
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const double d = pair_distance(&coords[i * dim], &coords[j * dim], dim);
                    if (d < kMinSeparation) continue;
                    const double f = p.derivative(d) / d;
                    for (int k = 0; k < dim; ++k) g[k].add(f * (coords[i * dim + k] - coords[j * dim + k]));
                }
                for (int k = 0; k < dim; ++k) (*gradient)[i * dim + k] = scale * g[k].value();
            }
        });
    }
    return value;
}

std::vector<double> initial_configuration(const RadialPotential& p, std::size_t n, Init init,
                                          std::uint64_t seed) {
    const int dim = p.dimension();
    const double ls = p.length_scale();
    std::mt19937_64 rng(seed);
    std::vector<double> x;
    x.reserve(n * static_cast<std::size_t>(dim));
    switch (init) {
        case Init::Lattice: {
            std::size_t side = 1;
            while (static_cast<double>(std::pow(static_cast<double>(side), dim)) < static_cast<double>(n)) ++side;
            std::uniform_real_distribution<double> jitter(-0.01 * ls, 0.01 * ls);
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t rest = k;
                for (int d = 0; d < dim; ++d) {
                    x.push_back(ls * static_cast<double>(rest % side) + jitter(rng));
                    rest /= side;
                }
            }
            break;
        }
        case Init::RandomBall: {
            const double radius = 0.5 * ls * std::max(1.0, std::pow(static_cast<double>(n), 1.0 / dim));
            fill_ball(x, n, radius, 0.0, dim, rng);
            break;
        }
        case Init::TwoCluster: {
            const std::size_t first = n / 2;
            const double radius =
                0.5 * ls * std::max(1.0, std::pow(static_cast<double>(n - first), 1.0 / dim));
            fill_ball(x, first, radius, -(radius + ls), dim, rng);
            fill_ball(x, n - first, radius, radius + ls, dim, rng);
            break;
        }
    }
    recentre(x, dim);
    return x;
}

MinimizationTrace minimize_particles(const RadialPotential& p, std::size_t n, Init init,
                                     std::uint64_t seed, std::size_t max_iter, double grad_tol,
                                     const MinimizeOptions& options) {
    if (n < 2) throw InvalidArgument("minimize_particles needs n >= 2");
    if (!p.differentiable())
        throw NonDifferentiable("minimize_particles needs a differentiable potential");
    const int dim = p.dimension();
    const double range = p.interaction_range();

    MinimizationTrace trace;
    trace.n_points = n;
    trace.seed = seed;
    trace.init = init;
    trace.interaction_range = range;

    std::vector<double> x = initial_configuration(p, n, init, seed);
    std::vector<double> grad;
    double energy = particle_energy(p, x, &grad);
    if (!std::isfinite(energy))
        throw NumericalError("initial configuration has non-finite energy");

    double max_force = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = pair_distance(&x[i * dim], &x[j * dim], dim);
            if (d >= kMinSeparation) max_force = std::max(max_force, std::abs(p.derivative(d)));
        }
    double step = max_force > 0.0 && std::isfinite(max_force)
                      ? 1.0 / (static_cast<double>(n) * max_force)
                      : 1.0;

    Iterate first = describe(x, dim, range);
    first.iteration = 0;
    first.energy = energy;
    trace.iterates.push_back(first);

    std::vector<double> trial(x.size());
    double g2 = norm2(grad);
    for (std::size_t iter = 1; iter <= max_iter && g2 > 0.0 && std::sqrt(g2) >= grad_tol; ++iter) {
        bool accepted = false;
        double trial_energy = energy;
        for (int h = 0; h < kMaxHalvings; ++h) {
            for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] - step * grad[k];
            trial_energy = particle_energy(p, trial, nullptr);
            if (std::isfinite(trial_energy) && trial_energy <= energy - kArmijo * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            trace.stalled = true;
            break;
        }
        if (options.verify_invariants && !(trial_energy <= energy))
            throw InvariantViolation("accepted step increased the energy");

        recentre(trial, dim);
        const EnergyTerms recentred = energy_terms(p, trial);
        if (options.verify_invariants &&
            std::abs(recentred.value - trial_energy) >
                1e-12 * std::max({std::abs(trial_energy), recentred.l1, 1e-300}))
            throw InvariantViolation("recentring changed the energy");

        x.swap(trial);
        energy = recentred.value;
        // Near-coincident particles on a cusp of W zig-zag under gradient
        // steps; merging them is kept only when it lowers the energy.
        trial = x;
        double max_move = 0.0;
        for (double g : grad) max_move = std::max(max_move, step * std::abs(g));
        if (coalesce(trial, dim, std::max(kCoalesceRadius * p.length_scale(), 4.0 * max_move))) {
            recentre(trial, dim);
            const double merged = particle_energy(p, trial, nullptr);
            if (merged < energy) {
                x.swap(trial);
                energy = merged;
            }
        }
        energy = particle_energy(p, x, &grad);
        g2 = norm2(grad);
        Iterate it = describe(x, dim, range);
        it.iteration = iter;
        it.energy = energy;
        it.step = step;
        trace.iterates.push_back(it);
        step *= 2.0;
    }

    trace.final_gradient_norm = std::sqrt(g2);
    trace.converged = !trace.stalled && (g2 == 0.0 || std::sqrt(g2) < grad_tol);
    trace.final_config = PointCloud::empirical(dim, x);
    trace.final_energy_with_diagonal = energy_pointcloud(p, trace.final_config, true).value;
    const std::size_t window = options.window > 0 ? options.window : std::max<std::size_t>(1, max_iter / 4);
    trace.classification = classify_trace(trace, window, options.growth_factor,
                                          options.cluster_gap_ratio, &trace.alpha);
    return trace;
}

Classification classify_trace(const MinimizationTrace& trace, std::size_t window,
                              double growth_factor, double cluster_gap_ratio,
                              std::optional<double>* alpha) {
    if (alpha) alpha->reset();
    const auto& its = trace.iterates;
    if (its.size() < 2) return Classification::Undecided;
    window = std::max<std::size_t>(1, std::min(window, its.size() / 2));
    const Iterate& last = its.back();
    const Iterate& ref = its[its.size() - 1 - window];
    const double n = static_cast<double>(std::max<std::size_t>(trace.n_points, 1));
    const double range = trace.interaction_range;

    // Dichotomy: a well separated 2-means split with stable fractions whose
    // gap keeps growing or already exceeds the interaction range.
    if (last.split_gap_ratio >= cluster_gap_ratio && last.split_gap > 0.0) {
        bool stable = true;
        for (std::size_t k = its.size() - 1 - window; k < its.size(); ++k)
            stable &= std::abs(its[k].split_fraction - last.split_fraction) <= 0.05;
        const bool receding = ref.split_gap > 0.0 && last.split_gap >= growth_factor * ref.split_gap;
        const bool isolated = std::isfinite(range) && last.split_gap > range &&
                              last.split_fraction * n >= 2.0 - 1e-9;
        const bool scale_ok = last.split_gap >= 1e-6 * std::max(last.max_pair_distance, 1e-300);
        if (stable && scale_ok && (receding || isolated)) {
            if (alpha) *alpha = last.split_fraction;
            return Classification::Dichotomy;
        }
    }

    // Vanishing: the cloud keeps spreading, or it already consists of
    // mutually non-interacting particles after spreading.
    const bool spreading = ref.q90_radius > 0.0 && ref.median_nn_distance > 0.0 &&
                           last.q90_radius >= growth_factor * ref.q90_radius &&
                           last.median_nn_distance >= std::sqrt(growth_factor) * ref.median_nn_distance;
    const bool dispersed = last.max_ball_mass <= 1.0 / n + 1e-12 && its.front().q90_radius > 0.0 &&
                           last.q90_radius >= growth_factor * its.front().q90_radius;
    if (spreading || dispersed) return Classification::Vanishing;

    // A stationary configuration stays put, however short the trace. Runs
    // that spread before the gradient fell below tolerance are left to the
    // window test: their gradient vanishes because the forces decay.
    if (trace.converged && last.q90_radius < growth_factor * its.front().q90_radius)
        return Classification::Tight;

    double lo = kInf, hi = 0.0, trace_max = 0.0;
    bool nonincreasing = true;
    for (std::size_t k = its.size() - 1 - window; k < its.size(); ++k) {
        lo = std::min(lo, its[k].q90_radius);
        hi = std::max(hi, its[k].q90_radius);
        if (k > its.size() - 1 - window) nonincreasing &= its[k].q90_radius <= its[k - 1].q90_radius;
    }
    for (const auto& it : its) trace_max = std::max(trace_max, it.q90_radius);
    if (hi - lo < 0.1 * trace_max || nonincreasing) return Classification::Tight;
    return Classification::Undecided;
}

MultiStartResult multi_start(const RadialPotential& p, std::size_t n,
                             const std::vector<Init>& inits,
                             const std::vector<std::uint64_t>& seeds, std::size_t max_iter,
                             double grad_tol, const MinimizeOptions& options) {
    if (inits.empty() || seeds.empty()) throw InvalidArgument("multi_start needs inits and seeds");
    MultiStartResult out;
    std::size_t best = 0;
    for (Init init : inits)
        for (std::uint64_t seed : seeds) {
            out.runs.push_back(minimize_particles(p, n, init, seed, max_iter, grad_tol, options));
            if (out.runs.back().final_energy() < out.runs[best].final_energy())
                best = out.runs.size() - 1;
        }
    out.best = out.runs[best];
    return out;
}

std::vector<ScanRow> ground_state_scan(const PotentialFactory& factory,
                                       const std::vector<std::vector<double>>& param_grid,
                                       std::size_t n, const std::vector<std::uint64_t>& seeds,
                                       Init init, std::size_t max_iter, double grad_tol,
                                       const MinimizeOptions& options) {
    if (seeds.empty()) throw InvalidArgument("ground_state_scan needs at least one seed");
    std::vector<ScanRow> rows;
    for (const auto& params : param_grid) {
        std::optional<RadialPotential> p;
        try {
            p.emplace(factory(params));
        } catch (const std::exception& e) {
            ScanRow row;
            row.params = params;
            row.energy = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
            rows.push_back(row);
            continue;
        }

        std::map<Classification, std::size_t> votes;
        std::optional<std::size_t> best;
        std::vector<ScanRow> cell;
        for (std::uint64_t seed : seeds) {
            ScanRow row;
            row.params = params;
            row.seed = seed;
            try {
                const auto trace = minimize_particles(*p, n, init, seed, max_iter, grad_tol, options);
                row.classification = trace.classification;
                row.energy = trace.final_energy();
                ++votes[trace.classification];
                if (!best || row.energy < cell[*best].energy) best = cell.size();
            } catch (const std::exception& e) {
                row.energy = std::numeric_limits<double>::quiet_NaN();
                row.error = e.what();
            }
            cell.push_back(row);
        }
        rows.insert(rows.end(), cell.begin(), cell.end());

        ScanRow aggregate;
        aggregate.params = params;
        if (!best) {
            aggregate.energy = std::numeric_limits<double>::quiet_NaN();
            aggregate.error = "all runs failed";
        } else {
            aggregate.energy = cell[*best].energy;
            std::size_t top = 0;
            for (const auto& [c, count] : votes) top = std::max(top, count);
            const Classification best_class = *cell[*best].classification;
            if (votes[best_class] == top) {
                aggregate.classification = best_class;
            } else {
                // Among tied classes, take the one reached by the lowest-energy seed.
                std::optional<std::size_t> pick;
                for (std::size_t k = 0; k < cell.size(); ++k)
                    if (cell[k].classification && votes[*cell[k].classification] == top &&
                        (!pick || cell[k].energy < cell[*pick].energy))
                        pick = k;
                aggregate.classification = cell[*pick].classification;
            }
        }
        rows.push_back(aggregate);
    }
    return rows;
}

}  // namespace nli
