#include "nli/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nli/errors.hpp"

namespace nli::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw InvalidArgument(path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    return v;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json number(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    return x;
}

Json to_json(const EnergyReport& r) {
    Json j;
    j["value"] = number(r.value);
    j["offdiagonal"] = number(r.offdiagonal);
    j["diagonal_contribution"] = number(r.diagonal_contribution);
    j["pair_count"] = r.pair_count;
    j["potential_id"] = r.potential_id;
    return j;
}

Json to_json(const HypothesisReport& r) {
    Json j;
    j["h1_lsc"] = to_string(r.h1_lsc);
    j["h2_locally_integrable"] = to_string(r.h2_locally_integrable);
    j["h2_value"] = number(r.h2_value);
    Json cut = Json::array();
    for (double v : r.h2_cutoff_estimates) cut.push_back(number(v));
    j["h2_cutoff_estimates"] = cut;
    j["h3_class"] = to_string(r.h3_class);
    Json probes = Json::array();
    for (const auto& p : r.h3_probes) probes.push_back({{"radius", number(p.radius)}, {"value", number(p.value)}});
    j["h3_probes"] = probes;
    j["C_W"] = number(r.c_w);
    j["C_W_radius"] = number(r.c_w_radius);
    return j;
}

Json to_json(const StabilityVerdict& v, const std::string& certificate_path) {
    Json j;
    j["criterion"] = to_string(v.criterion);
    j["outcome"] = to_string(v.outcome);
    j["numeric_value"] = number(v.numeric_value);
    j["parameter"] = number(v.parameter);
    j["certificate_path"] = certificate_path.empty() ? Json(nullptr) : Json(certificate_path);
    j["certificate_energy"] = v.certificate_energy ? to_json(*v.certificate_energy) : Json(nullptr);
    if (v.fit_c) j["fit_c"] = number(*v.fit_c);
    if (v.fit_d) j["fit_d"] = number(*v.fit_d);
    j["scanned_domain"] = v.scanned_domain;
    j["advisory"] = v.advisory;
    j["note"] = v.note;
    Json scan = Json::array();
    for (const auto& s : v.scan) scan.push_back({number(s.parameter), number(s.value)});
    j["scan"] = scan;
    return j;
}

void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& mu) {
    auto out = open_out(path);
    for (int d = 0; d < mu.dimension(); ++d) out << "x_" << d + 1 << ",";
    out << "weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (double x : mu.point(i)) out << format_double(x) << ",";
        out << format_double(mu.weight(i)) << "\n";
    }
}

PointCloud read_point_cloud_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
    const auto header = split_csv(strip(line));
    if (header.size() < 2 || header.back() != "weight")
        throw InvalidArgument(path.string() + ": expected header x_1,...,x_N,weight");
    const int dim = static_cast<int>(header.size()) - 1;
    std::vector<double> coords, weights;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
        for (int d = 0; d < dim; ++d) coords.push_back(parse_double(cells[d], path, lineno));
        weights.push_back(parse_double(cells.back(), path, lineno));
    }
    return PointCloud(dim, std::move(coords), std::move(weights));
}

void write_grid_csv(const std::filesystem::path& path, const GridDensity& rho) {
    auto out = open_out(path);
    out << "# grid dimension=" << rho.dimension() << " cell_width=" << format_double(rho.cell_width())
        << " origin=";
    for (int d = 0; d < rho.dimension(); ++d) out << (d ? ";" : "") << format_double(rho.origin()[d]);
    out << " extents=";
    for (int d = 0; d < rho.dimension(); ++d) out << (d ? ";" : "") << rho.extents()[d];
    out << "\n";
    for (int d = 0; d < rho.dimension(); ++d) out << "x_" << d + 1 << ",";
    out << "density\n";
    for (std::size_t flat = 0; flat < rho.cell_count(); ++flat) {
        const double v = rho.values()[flat];
        if (v <= 0.0) continue;
        const auto c = rho.cell_center(flat);
        for (int d = 0; d < rho.dimension(); ++d) out << format_double(c[d]) << ",";
        out << format_double(v) << "\n";
    }
}

void write_trace_csv(const std::filesystem::path& path, const MinimizationTrace& trace) {
    auto out = open_out(path);
    out << "iteration,energy,q90_radius,max_pair_distance,step,median_nn_distance,max_ball_mass\n";
    for (const auto& it : trace.iterates)
        out << it.iteration << "," << format_double(it.energy) << "," << format_double(it.q90_radius) << ","
            << format_double(it.max_pair_distance) << "," << format_double(it.step) << ","
            << format_double(it.median_nn_distance) << "," << format_double(it.max_ball_mass) << "\n";
}

Tabulated read_tabulated_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open tabulated profile " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
    if (split_csv(strip(line)).size() != 2)
        throw InvalidArgument(path.string() + ": expected header radius,value");
    Tabulated t;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2)
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        t.knots.push_back({parse_double(cells[0], path, lineno), parse_double(cells[1], path, lineno)});
    }
    return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

}  // namespace nli::io
