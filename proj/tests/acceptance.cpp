// Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "nli/energy.hpp"
#include "nli/errors.hpp"
#include "nli/groundstate.hpp"
#include "nli/measure.hpp"
#include "nli/potential.hpp"
#include "nli/stability.hpp"

using namespace nli;

namespace {

struct Outcome_ {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 ---------------------------------------------------------------------------

double morse_closed_form(double G, double L, int N) {
    return sphere_area(N) * boost::math::tgamma(N) * (1.0 - G * std::pow(L, N));
}

Outcome_ morse_boundary() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> G(0.0, 3.0), L(0.3, 2.5);
    double worst = 0.0;
    int samples = 0;
    while (samples < 50) {
        const int N = 1 + samples % 3;
        const double g = G(rng), l = L(rng);
        // The relative error is meaningless at the boundary itself.
        if (std::abs(1.0 - g * std::pow(l, N)) < 0.05) continue;
        const auto v = integral_criterion(RadialPotential(Morse{g, l}, N));
        const double exact = morse_closed_form(g, l, N);
        worst = std::max(worst, std::abs(v.numeric_value - exact) / std::abs(exact));
        ++samples;
    }
    double worst_flip = 0.0;
    for (auto [l, N] : std::vector<std::pair<double, int>>{{0.5, 1}, {1.7, 1}, {0.8, 2}, {1.3, 3}}) {
        double lo = 0.5 * std::pow(l, -N), hi = 2.0 * std::pow(l, -N);
        while (hi - lo > 1e-10 * hi) {
            const double mid = 0.5 * (lo + hi);
            const double value = gaussian_weighted_integral(RadialPotential(Morse{mid, l}, N), 0.0, 1e-10);
            (value > 0.0 ? lo : hi) = mid;
        }
        worst_flip = std::max(worst_flip, std::abs(0.5 * (lo + hi) * std::pow(l, N) - 1.0));
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-6 && worst_flip <= 1e-6 && t < 10.0,
            "max rel err " + fmt("%.2e", worst) + " over 50 samples, flip |G L^N - 1| <= " + fmt("%.2e", worst_flip) +
                ", " + fmt("%.1f", t) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome_ gaussian_reduction() {
    const std::vector<RadialPotential> ps{
        RadialPotential(Morse{1.0, 2.0}, 2),   RadialPotential(Morse{0.5, 1.0}, 1),
        RadialPotential(Morse{2.0, 1.0}, 3),   RadialPotential(Morse{0.2, 1.5}, 2),
        RadialPotential(Morse{1.5, 0.5}, 1),   RadialPotential(GaussianMix{{{1.0, 1.0}}}, 1),
        RadialPotential(GaussianMix{{{-1.0, 1.0}}}, 2),
        RadialPotential(GaussianMix{{{1.0, 1.0}, {-0.8, 2.0}}}, 1),
        RadialPotential(GaussianMix{{{2.0, 0.5}, {-0.3, 3.0}}}, 3),
        RadialPotential(GaussianMix{{{1.0, 0.7}, {0.4, 1.9}}}, 2)};
    double worst = 0.0;
    for (const auto& p : ps) {
        const auto g = gaussian_criterion(p, {1e-3});
        double at = NAN;
        for (const auto& s : g.scan)
            if (s.parameter == 1e-3) at = s.value;
        const double integral = integral_criterion(p).numeric_value;
        worst = std::max(worst, std::abs(at - integral) / std::abs(integral));
    }
    return {worst <= 1e-4, "max rel diff p=1e-3 vs integral " + fmt("%.2e", worst) + " over 10 potentials"};
}

// 3 ---------------------------------------------------------------------------

double independent_energy(const RadialPotential& p, const Witness& w) {
    if (const auto* g = std::get_if<GridDensity>(&w)) {
        if (g->cell_count() <= 6000) return energy_grid(p, *g, GridQuadrature::Direct, {2048, 0xa11ce}).value;
        return energy_grid(p, *g, GridQuadrature::RadialFast, {2048, 0xa11ce}).value;
    }
    if (const auto* c = std::get_if<PointCloud>(&w)) return energy_pointcloud(p, *c, true).value;
    return NAN;
}

Outcome_ certificate_soundness() {
    std::vector<RadialPotential> suite;
    for (int N = 1; N <= 3; ++N) {
        suite.emplace_back(Morse{1.0, 2.0}, N);
        suite.emplace_back(Morse{2.0, 1.0}, N);
        suite.emplace_back(Morse{0.25, 1.0}, N);
        suite.emplace_back(Morse{1.2, 1.1}, N);
        suite.emplace_back(GaussianMix{{{1.0, 1.0}, {-0.8, 2.0}}}, N);
        suite.emplace_back(GaussianMix{{{-1.0, 1.0}}}, N);
    }
    suite.erase(suite.begin() + 18, suite.end());
    suite.emplace_back(GaussianMix{{{1.0, 1.0}, {-0.3, 2.0}}}, 1);
    suite.emplace_back(GaussianMix{{{1.0, 1.0}, {0.5, 2.0}}}, 2);

    int he = 0, unsound = 0, contradictions = 0;
    std::string first_bad;
    for (const auto& p : suite) {
        std::vector<StabilityVerdict> verdicts{integral_criterion(p), gaussian_criterion(p, default_p_grid()),
                                               fourier_criterion(p, default_xi_grid())};
        if (p.dimension() == 1) verdicts.push_back(ruc_search(p, {4, 8, 16}, {1}, 600));
        bool sound_he = false, fourier_stable = false;
        for (const auto& v : verdicts) {
            if (v.criterion == Criterion::Fourier && v.outcome == Outcome::StableIndication) fourier_stable = true;
            if (v.outcome != Outcome::HESatisfied) continue;
            ++he;
            const double e = independent_energy(p, v.certificate);
            if (!(e < 0.0)) {
                ++unsound;
                if (first_bad.empty()) first_bad = p.describe() + " " + to_string(v.criterion);
            } else {
                sound_he = true;
            }
        }
        if (sound_he && fourier_stable) ++contradictions;
    }
    return {he > 0 && unsound == 0 && contradictions == 0,
            std::to_string(he) + " HE verdicts on 20 cases, " + std::to_string(unsound) + " unsound, " +
                std::to_string(contradictions) + " contradictions" + (first_bad.empty() ? "" : " (" + first_bad + ")")};
}

// 4 ---------------------------------------------------------------------------

PointCloud random_cloud(std::mt19937_64& rng, int dim) {
    std::uniform_int_distribution<int> count(2, 30);
    std::normal_distribution<double> x(0.0, 2.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    const int n = count(rng);
    std::vector<double> c, wt;
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) c.push_back(x(rng));
        wt.push_back(w(rng));
    }
    return PointCloud(dim, c, wt);
}

Outcome_ energy_identities() {
    std::mt19937_64 rng(404);
    const std::vector<RadialPotential> ps{RadialPotential(Morse{2.0, 1.0}, 1), RadialPotential(Morse{0.7, 1.4}, 2),
                                          RadialPotential(GaussianMix{{{1.0, 1.0}, {-0.6, 2.5}}}, 3),
                                          RadialPotential(PowerLaw{2.0, 1.0}, 2)};
    double scale_err = 0.0, shift_err = 0.0, split_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto& p = ps[k % ps.size()];
        const int dim = p.dimension();
        const auto mu = random_cloud(rng, dim);
        const double e = energy_pointcloud(p, mu).value;
        for (double c : {0.0, 0.5, 2.0}) {
            const double ec = energy_pointcloud(p, mu.scaled(c)).value;
            const double ref = c * c * e;
            scale_err = std::max(scale_err, ref == 0.0 ? std::abs(ec) : std::abs(ec - ref) / std::abs(ref));
        }
        std::normal_distribution<double> s(0.0, 5.0);
        std::vector<double> shift(dim);
        for (double& v : shift) v = s(rng);
        shift_err = std::max(shift_err, std::abs(energy_pointcloud(p, mu.translated(shift)).value - e) / std::abs(e));

        const auto nu = random_cloud(rng, dim);
        const double lhs = energy_pointcloud(p, mu + nu).value;
        const double e2 = energy_pointcloud(p, nu).value;
        const double b = bilinear_form(p, mu, nu);
        // Relative to the size of the terms, so cancellation does not count.
        const double size = std::max(std::abs(lhs), std::abs(e) + std::abs(e2) + std::abs(b));
        split_err = std::max(split_err, std::abs(lhs - (e + e2 + b)) / size);
    }
    return {scale_err <= 1e-12 && shift_err <= 1e-12 && split_err <= 1e-12,
            "scaling " + fmt("%.1e", scale_err) + ", translation " + fmt("%.1e", shift_err) + ", decomposition " +
                fmt("%.1e", split_err) + " (100 clouds each)"};
}

// 5 ---------------------------------------------------------------------------

Outcome_ vanishing_decay() {
    const auto t0 = std::chrono::steady_clock::now();
    const RadialPotential p(GaussianMix{{{1.0, 1.0}}}, 1);
    double worst = 0.0, previous = std::numeric_limits<double>::infinity();
    bool monotone = true;
    std::size_t cells = 0;
    for (int n : {8, 16, 32, 64}) {
        const auto rho = vanishing_ball_sequence(n, 1, 500);
        cells = rho.cell_count();
        const double e = energy_grid(p, rho, GridQuadrature::Direct).value;
        const double oracle = std::sqrt(M_PI) * std::erf(2.0 * n) - (1.0 - std::exp(-4.0 * n * n)) / (2.0 * n);
        worst = std::max(worst, std::abs(e * 2 * n - oracle) / oracle);
        monotone &= e < previous && e > 0.0;
        previous = e;
    }
    const double t = seconds_since(t0);
    return {worst <= 0.02 && monotone && t < 30.0,
            "max rel dev of 2n E from oracle " + fmt("%.2e", worst) + (monotone ? ", monotone" : ", NOT monotone") +
                ", " + std::to_string(cells) + " cells, " + fmt("%.1f", t) + " s"};
}

// 6 ---------------------------------------------------------------------------

Outcome_ empirical_fidelity() {
    std::vector<GridDensity> targets;
    targets.emplace_back(1, std::vector<double>{0.0}, 0.01, std::vector<int>{100}, std::vector<double>(100, 1.0));
    {
        std::vector<double> v(60, 0.0);
        for (int k = 0; k < 10; ++k) v[k] = v[50 + k] = 1.0;
        targets.push_back(GridDensity(1, {-1.5}, 0.05, {60}, v).normalized());
    }
    targets.push_back(gaussian_witness_density(1.0, 1, 10, 8.0));
    targets.emplace_back(2, std::vector<double>{0.0, 0.0}, 0.05, std::vector<int>{20, 20},
                         std::vector<double>(400, 1.0));
    targets.push_back(gaussian_witness_density(1.5, 2, 4, 6.0));

    int checks = 0, failed = 0;
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto raster = targets[t].to_point_cloud(1);
        for (double eps : {0.05, 0.1, 0.2}) {
            const auto approx = empirical_approximation(targets[t], eps, 10, 7 + t);
            std::vector<double> grid;
            for (int k = 1; k <= 20; ++k) grid.push_back(eps * k / 20.0);
            const double d = levy_prokhorov_upper(raster, approx.measure, grid);
            worst_ratio = std::max(worst_ratio, d / eps);
            ++checks;
            if (!(d <= eps)) ++failed;
        }
    }
    return {failed == 0, std::to_string(checks) + " (target, eps) pairs, max d_LP/eps " + fmt("%.2f", worst_ratio)};
}

// 7 ---------------------------------------------------------------------------

double offdiag_energy(const RadialPotential& p, const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) s += p(std::abs(x[i] - x[j]));
    return 2.0 * s / (n * n);
}

// Particle 0 pinned at the origin, the others ordered to its right (the
// energy is invariant under reflections and permutations). Exhaustive scan of
// the gaps on a coarse grid, then an exhaustive 1e-3 grid around the best
// coarse candidates.
double brute_force(const RadialPotential& p, int n, double span) {
    const int free = n - 1;
    auto scan = [&](const std::vector<double>& lo, double step, int count,
                    std::vector<std::pair<double, std::vector<double>>>* keep, std::size_t keep_n) {
        std::vector<int> idx(free, 0);
        std::vector<double> gaps(free), x(n);
        double best = std::numeric_limits<double>::infinity();
        while (true) {
            x[0] = 0.0;
            for (int k = 0; k < free; ++k) {
                gaps[k] = std::max(0.0, lo[k] + step * idx[k]);
                x[k + 1] = x[k] + gaps[k];
            }
            const double e = offdiag_energy(p, x);
            best = std::min(best, e);
            if (keep) {
                keep->push_back({e, gaps});
                if (keep->size() > 4 * keep_n) {
                    std::nth_element(keep->begin(), keep->begin() + keep_n, keep->end(),
                                     [](const auto& a, const auto& b) { return a.first < b.first; });
                    keep->resize(keep_n);
                }
            }
            int k = 0;
            while (k < free && ++idx[k] > count) idx[k++] = 0;
            if (k == free) break;
        }
        return best;
    };
    const double coarse = 0.02;
    std::vector<std::pair<double, std::vector<double>>> candidates;
    scan(std::vector<double>(free, 0.0), coarse, static_cast<int>(span / coarse), &candidates, 8);
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    candidates.resize(std::min<std::size_t>(8, candidates.size()));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [e, gaps] : candidates) {
        std::vector<double> lo(free);
        for (int k = 0; k < free; ++k) lo[k] = std::round((gaps[k] - coarse) / 1e-3) * 1e-3;
        best = std::min(best, scan(lo, 1e-3, static_cast<int>(std::lround(2 * coarse / 1e-3)), nullptr, 0));
    }
    return best;
}

Outcome_ small_n_oracle() {
    double worst = 0.0;
    std::string where;
    for (auto [name, p] : std::vector<std::pair<std::string, RadialPotential>>{
             {"PowerLaw(2,1)", RadialPotential(PowerLaw{2.0, 1.0}, 1)},
             {"Morse(2,1)", RadialPotential(Morse{2.0, 1.0}, 1)}}) {
        for (int n : {2, 3, 4}) {
            const auto ms = multi_start(p, n, {Init::Lattice, Init::RandomBall, Init::TwoCluster}, {1, 2, 3}, 5000,
                                        1e-13);
            const double oracle = brute_force(p, n, 3.0);
            const double diff = std::abs(ms.best.final_energy() - oracle);
            if (diff >= worst) {
                worst = diff;
                where = name + " n=" + std::to_string(n);
            }
        }
    }
    return {worst <= 1e-4, "max |E_min - E_grid| " + fmt("%.2e", worst) + " (" + where + ")"};
}

// 8 ---------------------------------------------------------------------------

struct Vote {
    std::map<Classification, int> counts;
    double best_energy = std::numeric_limits<double>::infinity();
    Classification majority() const {
        Classification m = Classification::Undecided;
        int top = -1;
        for (const auto& [c, k] : counts)
            if (k > top) m = c, top = k;
        return m;
    }
};

Vote vote(const RadialPotential& p, std::size_t n, Init init, std::size_t max_iter, double grad_tol) {
    Vote v;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t = minimize_particles(p, n, init, seed, max_iter, grad_tol);
        ++v.counts[t.classification];
        v.best_energy = std::min(v.best_energy, t.final_energy());
    }
    return v;
}

Outcome_ behavioral_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    const std::vector<RadialPotential> h3a{RadialPotential(PowerLaw{2.0, 1.0}, 1), RadialPotential(PowerLaw{4.0, 2.0}, 3),
                                           RadialPotential(PowerLaw{2.0, -0.5}, 2), RadialPotential(Power{1.0, 2.0}, 2)};
    int tight = 0;
    for (const auto& p : h3a) {
        const auto v = vote(p, 32, Init::RandomBall, 3000, 1e-12);
        if (v.majority() == Classification::Tight) ++tight;
    }
    ok &= tight == static_cast<int>(h3a.size());
    detail += "(a) " + std::to_string(tight) + "/" + std::to_string(h3a.size()) + " H3a tight";

    const auto g = vote(RadialPotential(GaussianMix{{{1.0, 1.0}}}, 2), 64, Init::Lattice, 10000, 0.0);
    const bool gv = g.majority() == Classification::Vanishing && g.best_energy >= 0.0 && g.best_energy <= 1e-3;
    ok &= gv;
    detail += "; (b) gaussian " + to_string(g.majority()) + " E=" + fmt("%.1e", g.best_energy);

    int morse_ok = 0;
    for (const auto& p : {RadialPotential(Morse{2.0, 1.0}, 1), RadialPotential(Morse{0.5, 2.0}, 2)}) {
        const auto v = vote(p, 32, Init::RandomBall, 3000, 1e-12);
        if (v.majority() == Classification::Tight && v.best_energy < 0.0) ++morse_ok;
    }
    ok &= morse_ok == 2;
    detail += "; (c) " + std::to_string(morse_ok) + "/2 Morse tight with E<0";

    const double t = seconds_since(t0);
    ok &= t < 300.0;
    return {ok, detail + ", " + fmt("%.0f", t) + " s"};
}

// 9 ---------------------------------------------------------------------------

Outcome_ gradient_check() {
    std::mt19937_64 rng(909);
    std::uniform_int_distribution<int> dim(1, 3), count(3, 12);
    std::normal_distribution<double> x(0.0, 1.2);
    const std::vector<std::pair<std::string, std::function<RadialPotential(int)>>> families{
        {"powerlaw", [](int N) { return RadialPotential(PowerLaw{2.0, N > 1 ? -0.5 : 0.5}, N); }},
        {"morse", [](int N) { return RadialPotential(Morse{2.0, 0.8}, N); }},
        {"gaussmix", [](int N) { return RadialPotential(GaussianMix{{{1.0, 1.0}, {-0.7, 2.0}}}, N); }},
        {"power", [](int N) { return RadialPotential(Power{0.8, 2.5}, N); }}};
    double worst = 0.0;
    std::string where;
    for (const auto& [name, make] : families) {
        for (int k = 0; k < 50; ++k) {
            const int N = dim(rng);
            const auto p = make(N);
            std::vector<double> c(static_cast<std::size_t>(N * count(rng)));
            for (double& v : c) v = x(rng);
            std::vector<double> grad;
            particle_energy(p, c, &grad);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                auto cp = c, cm = c;
                cp[i] += 1e-6;
                cm[i] -= 1e-6;
                const double fd = (particle_energy(p, cp, nullptr) - particle_energy(p, cm, nullptr)) / 2e-6;
                num += (grad[i] - fd) * (grad[i] - fd);
                den += fd * fd;
            }
            const double rel = std::sqrt(num / den);
            if (rel > worst) worst = rel, where = name;
        }
    }
    return {worst <= 1e-5, "max rel err " + fmt("%.2e", worst) + " (" + where + "), 50 configs x 4 families"};
}

// 10 --------------------------------------------------------------------------

Outcome_ ruc_asymptotics() {
    const std::vector<std::size_t> ns{8, 16, 32, 64};
    const auto cat = ruc_search(RadialPotential(Morse{2.0, 1.0}, 1), ns, {1, 2}, 2000);
    const auto st = ruc_search(RadialPotential(Morse{0.25, 1.0}, 1), ns, {1, 2}, 2000);
    const double c1 = cat.fit_c.value_or(NAN), c2 = st.fit_c.value_or(NAN);
    return {c1 < -0.01 && std::abs(c2) < 1e-3 && cat.outcome == Outcome::HESatisfied &&
                st.outcome == Outcome::StableIndication,
            "Morse(2,1) c=" + fmt("%.4g", c1) + " " + to_string(cat.outcome) + "; Morse(0.25,1) c=" + fmt("%.3g", c2) +
                " " + to_string(st.outcome)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome_()>>> criteria{
        {"Morse stability boundary", morse_boundary},
        {"Gaussian-weighted reduction", gaussian_reduction},
        {"Certificate soundness", certificate_soundness},
        {"Energy identities", energy_identities},
        {"Vanishing-sequence decay", vanishing_decay},
        {"Empirical approximation fidelity", empirical_fidelity},
        {"Small-n global-optimization oracle", small_n_oracle},
        {"Ground-state behavioral suite", behavioral_suite},
        {"Gradient correctness", gradient_check},
        {"(Ruc) asymptotics", ruc_asymptotics}};
    // Optional argument: run a single criterion by number.
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (only && only != static_cast<int>(k + 1)) continue;
        Outcome_ r;
        try {
            r = criteria[k].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.pass;
        std::printf("%s  %2zu  %s: %s\n", r.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), r.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
