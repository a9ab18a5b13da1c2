#include "app.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nli/errors.hpp"
#include "nli/groundstate.hpp"
#include "nli/io.hpp"
#include "nli/parallel.hpp"
#include "nli/stability.hpp"

namespace nli::cli {

namespace {

using io::Json;
using io::format_double;
using io::number;

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    return out;
}

StabilityOptions stability_options(const RunConfig& cfg) {
    StabilityOptions o;
    o.quad_tol = cfg.quad_tol;
    o.verdict_tol = cfg.verdict_tol;
    o.max_witness_cells = cfg.stability.max_witness_cells;
    return o;
}

MinimizeOptions minimize_options(const RunConfig& cfg) {
    MinimizeOptions o;
    o.window = cfg.minimize.window;
    o.growth_factor = cfg.minimize.growth_factor;
    o.cluster_gap_ratio = cfg.minimize.cluster_gap_ratio;
    return o;
}

Json potential_json(const RunConfig& cfg, const RadialPotential& p) {
    Json j;
    j["family"] = cfg.potential.family;
    j["N"] = cfg.potential.dimension;
    for (const auto& [k, v] : cfg.potential.params) j[k] = number(v);
    if (cfg.potential.family == "gaussmix") {
        Json terms = Json::array();
        for (const auto& t : cfg.potential.terms)
            terms.push_back({{"amplitude", number(t.amplitude)}, {"width", number(t.width)}});
        j["terms"] = terms;
    }
    if (cfg.potential.family == "tabulated") j["csv"] = cfg.potential.csv.filename().string();
    j["description"] = p.describe();
    return j;
}

void write_json(const std::filesystem::path& path, const Json& j) { io::write_text(path, j.dump(2) + "\n"); }

void prepare_output(const RunConfig& cfg) { std::filesystem::create_directories(cfg.output_dir); }

Criterion parse_criterion(const std::string& name) {
    if (name == "integral") return Criterion::Integral;
    if (name == "gaussian_weighted") return Criterion::GaussianWeighted;
    if (name == "fourier") return Criterion::Fourier;
    return Criterion::RucSearch;
}

std::string write_certificate(const RunConfig& cfg, const StabilityVerdict& v, const std::string& stem) {
    const std::string name = stem + ".csv";
    if (const auto* cloud = std::get_if<PointCloud>(&v.certificate)) {
        io::write_point_cloud_csv(cfg.output_dir / name, *cloud);
        return name;
    }
    if (const auto* grid = std::get_if<GridDensity>(&v.certificate)) {
        io::write_grid_csv(cfg.output_dir / name, *grid);
        return name;
    }
    return {};
}

struct CriterionResult {
    std::optional<StabilityVerdict> verdict;
    std::string skip_reason;
};

// Criteria outside their hypotheses are skipped with the reason; genuine
// numerical failures propagate.
CriterionResult run_criterion(const RunConfig& cfg, const RadialPotential& p, Criterion c) {
    const auto opts = stability_options(cfg);
    const bool h3b = tail_class(p) == TailClass::H3b;
    try {
        switch (c) {
            case Criterion::Integral:
                if (!h3b) return {std::nullopt, "requires (H3b)"};
                return {integral_criterion(p, opts), {}};
            case Criterion::GaussianWeighted:
                if (!h3b) return {std::nullopt, "requires (H3b)"};
                return {gaussian_criterion(p, log_grid(cfg.stability.p_min, cfg.stability.p_max, cfg.stability.p_count),
                                           opts),
                        {}};
            case Criterion::Fourier: {
                std::vector<double> xi{0.0};
                for (double x : log_grid(cfg.stability.xi_min, cfg.stability.xi_max, cfg.stability.xi_count))
                    xi.push_back(x);
                return {fourier_criterion(p, xi, opts), {}};
            }
            case Criterion::RucSearch:
                return {ruc_search(p, cfg.stability.ruc_n, cfg.seeds, cfg.stability.ruc_budget, opts), {}};
        }
    } catch (const PreconditionViolated& e) {
        return {std::nullopt, e.what()};
    } catch (const NotAbsolutelyIntegrable& e) {
        return {std::nullopt, e.what()};
    } catch (const NotSquareIntegrable& e) {
        return {std::nullopt, e.what()};
    } catch (const DimensionUnsupported& e) {
        return {std::nullopt, e.what()};
    } catch (const NonDifferentiable& e) {
        return {std::nullopt, e.what()};
    }
    return {};
}

std::string join_params(const std::vector<std::pair<std::string, std::vector<double>>>& grid) {
    std::string out;
    for (const auto& [name, values] : grid) out += name + ",";
    return out;
}

std::vector<std::vector<double>> cartesian(const std::vector<std::pair<std::string, std::vector<double>>>& grid) {
    std::vector<std::vector<double>> cells{{}};
    for (const auto& [name, values] : grid) {
        std::vector<std::vector<double>> next;
        for (const auto& cell : cells)
            for (double v : values) {
                auto c = cell;
                c.push_back(v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    return cells;
}

PotentialSpec cell_spec(const RunConfig& cfg, const std::vector<double>& params) {
    PotentialSpec spec = cfg.potential;
    for (std::size_t k = 0; k < params.size(); ++k) spec = spec.with(cfg.scan.grid[k].first, params[k]);
    return spec;
}

std::string csv_field(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const auto p = cfg.potential.build();
    const auto report = probe_hypotheses(p, cfg.quad_tol);
    const auto inf = infimum_estimate(p);
    prepare_output(cfg);

    Json j;
    j["potential"] = potential_json(cfg, p);
    j["hypotheses"] = io::to_json(report);
    j["infimum"] = {{"value", number(inf.value)}, {"radius", number(inf.radius)}};
    write_json(cfg.output_dir / "hypotheses.json", j);

    out << "potential   " << p.describe() << "\n";
    out << "H1 (lsc)    " << to_string(report.h1_lsc) << "\n";
    out << "H2 (L1loc)  " << to_string(report.h2_locally_integrable) << "  int_0^1 = " << format_double(report.h2_value)
        << "\n";
    out << "H3 (tail)   " << to_string(report.h3_class) << "\n";
    out << "C_W         " << format_double(report.c_w) << " at r = " << format_double(report.c_w_radius) << "\n";
    out << "report      " << (cfg.output_dir / "hypotheses.json").string() << "\n";
    return kOk;
}

int cmd_stability(const RunConfig& cfg, std::ostream& out) {
    const auto p = cfg.potential.build();
    prepare_output(cfg);

    Json verdicts = Json::array();
    Json skipped = Json::array();
    for (const auto& name : cfg.stability.criteria) {
        const auto result = run_criterion(cfg, p, parse_criterion(name));
        if (!result.verdict) {
            skipped.push_back({{"criterion", name}, {"reason", result.skip_reason}});
            out << name << ": skipped (" << result.skip_reason << ")\n";
            continue;
        }
        const auto& v = *result.verdict;
        const std::string cert = write_certificate(cfg, v, "certificate_" + name);
        verdicts.push_back(io::to_json(v, cert));
        out << name << ": " << to_string(v.outcome) << "  value = " << format_double(v.numeric_value);
        if (!cert.empty()) out << "  certificate = " << cert;
        out << "\n";
    }
    Json j;
    j["potential"] = potential_json(cfg, p);
    j["verdicts"] = verdicts;
    j["skipped"] = skipped;
    write_json(cfg.output_dir / "verdicts.json", j);
    return kOk;
}

int cmd_minimize(const RunConfig& cfg, std::ostream& out) {
    const auto p = cfg.potential.build();
    const auto& m = cfg.minimize;
    const auto opts = minimize_options(cfg);
    prepare_output(cfg);

    Json runs = Json::array();
    std::optional<std::size_t> best;
    std::vector<MinimizationTrace> traces;
    for (std::uint64_t seed : cfg.seeds) {
        auto trace = minimize_particles(p, m.n, m.init, seed, m.max_iter, m.grad_tol, opts);
        const std::string suffix = "_seed" + std::to_string(seed);
        io::write_trace_csv(cfg.output_dir / ("trace" + suffix + ".csv"), trace);
        io::write_point_cloud_csv(cfg.output_dir / ("final_config" + suffix + ".csv"), trace.final_config);

        Json r;
        r["seed"] = seed;
        r["classification"] = to_string(trace.classification);
        r["alpha"] = trace.alpha ? number(*trace.alpha) : Json(nullptr);
        r["final_energy"] = number(trace.final_energy());
        r["final_energy_with_diagonal"] = number(trace.final_energy_with_diagonal);
        r["iterations"] = trace.iterates.empty() ? 0 : trace.iterates.back().iteration;
        r["stalled"] = trace.stalled;
        r["converged"] = trace.converged;
        r["final_gradient_norm"] = number(trace.final_gradient_norm);
        r["final_q90_radius"] = number(trace.iterates.empty() ? 0.0 : trace.iterates.back().q90_radius);
        r["final_max_pair_distance"] =
            number(trace.iterates.empty() ? 0.0 : trace.iterates.back().max_pair_distance);
        r["trace"] = "trace" + suffix + ".csv";
        r["final_config"] = "final_config" + suffix + ".csv";
        runs.push_back(r);

        out << "seed " << seed << ": " << to_string(trace.classification)
            << "  energy = " << format_double(trace.final_energy()) << "  iterations = " << r["iterations"].dump()
            << "\n";
        if (!best || trace.final_energy() < traces[*best].final_energy()) best = traces.size();
        traces.push_back(std::move(trace));
    }

    std::map<std::string, std::size_t> votes;
    for (const auto& t : traces) ++votes[to_string(t.classification)];
    std::string majority = to_string(traces[*best].classification);
    for (const auto& [name, count] : votes)
        if (count > votes[majority]) majority = name;

    Json j;
    j["potential"] = potential_json(cfg, p);
    j["n"] = m.n;
    j["init"] = to_string(m.init);
    j["max_iter"] = m.max_iter;
    j["grad_tol"] = number(m.grad_tol);
    j["classification"] = majority;
    j["best_seed"] = traces[*best].seed;
    j["best_energy"] = number(traces[*best].final_energy());
    j["runs"] = runs;
    write_json(cfg.output_dir / "classification.json", j);
    return kOk;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
    const auto& m = cfg.minimize;
    const auto cells = cartesian(cfg.scan.grid);
    prepare_output(cfg);

    const PotentialFactory factory = [&](const std::vector<double>& params) {
        return cell_spec(cfg, params).build();
    };
    const auto rows = ground_state_scan(factory, cells, m.n, cfg.seeds, m.init, m.max_iter, m.grad_tol,
                                        minimize_options(cfg));

    // Integral verdict per cell, independent of the seeds.
    std::vector<std::pair<std::string, std::string>> integral(cells.size());
    if (cfg.scan.stability) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                const auto p = factory(cells[c]);
                const auto result = run_criterion(cfg, p, Criterion::Integral);
                if (result.verdict)
                    integral[c] = {to_string(result.verdict->outcome), format_double(result.verdict->numeric_value)};
                else
                    integral[c] = {"skipped", ""};
            } catch (const std::invalid_argument&) {
                integral[c] = {"error", ""};
            } catch (const NumericalError&) {
                integral[c] = {"error", ""};
            }
        }
    }

    std::ostringstream csv;
    csv << join_params(cfg.scan.grid) << "seed,classification,energy,integral_outcome,integral_value,error\n";
    std::size_t cell = 0;
    for (const auto& row : rows) {
        while (cell < cells.size() && cells[cell] != row.params) ++cell;
        for (double v : row.params) csv << format_double(v) << ",";
        csv << (row.seed ? std::to_string(*row.seed) : std::string("all")) << ","
            << (row.classification ? to_string(*row.classification) : std::string()) << ","
            << (row.error.empty() ? format_double(row.energy) : std::string()) << ",";
        if (cell < cells.size()) csv << integral[cell].first << "," << integral[cell].second;
        else csv << ",";
        csv << "," << csv_field(row.error) << "\n";
    }
    io::write_text(cfg.output_dir / "phase_table.csv", csv.str());
    out << "cells " << cells.size() << ", rows " << rows.size() << "\n";
    out << "table " << (cfg.output_dir / "phase_table.csv").string() << "\n";
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairwise interaction energies: hypotheses, stability criteria and ground states"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    std::optional<unsigned> threads;
    const std::vector<std::string> names{"analyze", "stability", "minimize", "scan"};
    const std::vector<std::string> help{"Probe the hypotheses of a potential",
                                        "Run the stability criteria and write certificates",
                                        "Minimize the discrete particle energy",
                                        "Sweep a parameter grid into a phase table"};
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto* sub = app.add_subcommand(names[k], help[k]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed-override", seed_override, "Replace the seeds list with this seed");
        sub->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_override) cfg.seeds = {*seed_override};
        if (threads) cfg.threads = *threads;
        set_thread_count(cfg.threads);

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "analyze") return cmd_analyze(cfg, out);
        if (command == "stability") return cmd_stability(cfg, out);
        if (command == "minimize") return cmd_minimize(cfg, out);
        return cmd_scan(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const PreconditionViolated& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kInvariantViolation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInvariantViolation;
    }
}

}  // namespace nli::cli
