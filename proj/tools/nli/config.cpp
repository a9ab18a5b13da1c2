#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "nli/errors.hpp"
#include "nli/io.hpp"

namespace nli::cli {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown(const Json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

std::string path_of(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

double get_double(const Json& obj, const std::string& where, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("key '" + path_of(where, key) + "' must be a number");
    return v.get<double>();
}

std::uint64_t get_uint(const Json& v, const std::string& name) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("key '" + name + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::size_t get_size(const Json& obj, const std::string& where, const std::string& key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    return static_cast<std::size_t>(get_uint(obj.at(key), path_of(where, key)));
}

void require_positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError("key '" + name + "' must be positive");
}

const std::map<std::string, std::vector<std::pair<std::string, double>>>& family_defaults() {
    static const std::map<std::string, std::vector<std::pair<std::string, double>>> d{
        {"powerlaw", {{"a", 2.0}, {"r", 1.0}}},
        {"morse", {{"G", 1.0}, {"L", 1.0}}},
        {"gaussmix", {}},
        {"tabulated", {}},
        {"power", {{"coefficient", 1.0}, {"exponent", 2.0}}},
    };
    return d;
}

PotentialSpec parse_potential(const Json& obj, const std::filesystem::path& base_dir) {
    if (!obj.is_object()) throw ConfigError("'potential' must be an object");
    if (!obj.contains("family") || !obj.at("family").is_string())
        throw ConfigError("key 'potential.family' must be one of powerlaw, morse, gaussmix, tabulated, power");
    PotentialSpec spec;
    spec.family = obj.at("family").get<std::string>();
    const auto& defaults = family_defaults();
    const auto it = defaults.find(spec.family);
    if (it == defaults.end())
        throw ConfigError("key 'potential.family' has unknown value '" + spec.family + "'");

    std::set<std::string> allowed{"family", "N"};
    for (const auto& [name, value] : it->second) allowed.insert(name);
    if (spec.family == "gaussmix") allowed.insert("terms");
    if (spec.family == "tabulated") allowed.insert("csv");
    reject_unknown(obj, "potential", allowed);

    if (obj.contains("N")) {
        const auto d = get_uint(obj.at("N"), "potential.N");
        if (d < 1 || d > 16) throw ConfigError("key 'potential.N' must lie in [1, 16]");
        spec.dimension = static_cast<int>(d);
    }
    for (const auto& [name, fallback] : it->second)
        spec.params.emplace_back(name, get_double(obj, "potential", name, fallback));

    if (spec.family == "gaussmix") {
        if (obj.contains("terms")) {
            const auto& terms = obj.at("terms");
            if (!terms.is_array()) throw ConfigError("key 'potential.terms' must be an array");
            for (std::size_t k = 0; k < terms.size(); ++k) {
                const std::string where = "potential.terms[" + std::to_string(k) + "]";
                reject_unknown(terms[k], where, {"amplitude", "width"});
                spec.terms.push_back({get_double(terms[k], where, "amplitude", 1.0),
                                      get_double(terms[k], where, "width", 1.0)});
            }
        }
    }
    if (spec.family == "tabulated") {
        if (!obj.contains("csv") || !obj.at("csv").is_string())
            throw ConfigError("key 'potential.csv' must name a radius,value CSV file");
        spec.csv = obj.at("csv").get<std::string>();
        if (spec.csv.is_relative()) spec.csv = base_dir / spec.csv;
    }
    return spec;
}

std::vector<std::size_t> parse_size_list(const Json& v, const std::string& name) {
    if (!v.is_array() || v.empty()) throw ConfigError("key '" + name + "' must be a nonempty array");
    std::vector<std::size_t> out;
    for (const auto& x : v) out.push_back(static_cast<std::size_t>(get_uint(x, name)));
    return out;
}

}  // namespace

RadialPotential PotentialSpec::build() const {
    auto param = [&](const std::string& name) {
        for (const auto& [k, v] : params)
            if (k == name) return v;
        throw ConfigError("missing potential parameter '" + name + "'");
    };
    if (family == "powerlaw") return RadialPotential(PowerLaw{param("a"), param("r")}, dimension);
    if (family == "morse") return RadialPotential(Morse{param("G"), param("L")}, dimension);
    if (family == "gaussmix") return RadialPotential(GaussianMix{terms}, dimension);
    if (family == "tabulated") return RadialPotential(io::read_tabulated_csv(csv), dimension);
    if (family == "power") return RadialPotential(Power{param("coefficient"), param("exponent")}, dimension);
    throw ConfigError("unknown potential family '" + family + "'");
}

PotentialSpec PotentialSpec::with(const std::string& name, double value) const {
    PotentialSpec out = *this;
    if (name == "N") {
        if (value != std::floor(value) || value < 1 || value > 16)
            throw InvalidArgument("dimension must be an integer in [1, 16]");
        out.dimension = static_cast<int>(value);
        return out;
    }
    for (auto& [k, v] : out.params)
        if (k == name) {
            v = value;
            return out;
        }
    throw ConfigError("scan parameter '" + name + "' is not a parameter of family " + family);
}

RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "", {"potential", "output_dir", "seeds", "quad_tol", "verdict_tol", "threads",
                             "stability", "minimize", "scan"});
    RunConfig cfg;
    if (!doc.contains("potential")) throw ConfigError("missing key 'potential'");
    cfg.potential = parse_potential(doc.at("potential"), base_dir);

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("key 'output_dir' must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
        if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
    } else {
        cfg.output_dir = base_dir / cfg.output_dir;
    }
    if (doc.contains("seeds")) {
        const auto& s = doc.at("seeds");
        if (!s.is_array() || s.empty()) throw ConfigError("key 'seeds' must be a nonempty array");
        cfg.seeds.clear();
        for (const auto& x : s) cfg.seeds.push_back(get_uint(x, "seeds"));
    }
    cfg.quad_tol = get_double(doc, "", "quad_tol", cfg.quad_tol);
    cfg.verdict_tol = get_double(doc, "", "verdict_tol", cfg.verdict_tol);
    require_positive(cfg.quad_tol, "quad_tol");
    require_positive(cfg.verdict_tol, "verdict_tol");
    if (doc.contains("threads")) cfg.threads = static_cast<unsigned>(get_uint(doc.at("threads"), "threads"));

    if (doc.contains("stability")) {
        const auto& s = doc.at("stability");
        reject_unknown(s, "stability", {"criteria", "p_min", "p_max", "p_count", "xi_min", "xi_max",
                                        "xi_count", "ruc_n", "ruc_budget", "max_witness_cells"});
        auto& c = cfg.stability;
        if (s.contains("criteria")) {
            const auto& list = s.at("criteria");
            if (!list.is_array()) throw ConfigError("key 'stability.criteria' must be an array");
            c.criteria.clear();
            for (const auto& x : list) {
                static const std::set<std::string> known{"integral", "gaussian_weighted", "fourier", "ruc_search"};
                if (!x.is_string() || !known.count(x.get<std::string>()))
                    throw ConfigError("key 'stability.criteria' has an unknown criterion");
                c.criteria.push_back(x.get<std::string>());
            }
        }
        c.p_min = get_double(s, "stability", "p_min", c.p_min);
        c.p_max = get_double(s, "stability", "p_max", c.p_max);
        c.p_count = get_size(s, "stability", "p_count", c.p_count);
        c.xi_min = get_double(s, "stability", "xi_min", c.xi_min);
        c.xi_max = get_double(s, "stability", "xi_max", c.xi_max);
        c.xi_count = get_size(s, "stability", "xi_count", c.xi_count);
        if (s.contains("ruc_n")) c.ruc_n = parse_size_list(s.at("ruc_n"), "stability.ruc_n");
        c.ruc_budget = get_size(s, "stability", "ruc_budget", c.ruc_budget);
        c.max_witness_cells = get_size(s, "stability", "max_witness_cells", c.max_witness_cells);
        require_positive(c.p_min, "stability.p_min");
        require_positive(c.xi_min, "stability.xi_min");
        if (!(c.p_max > c.p_min) || c.p_count < 2) throw ConfigError("key 'stability.p_max' must exceed p_min with p_count >= 2");
        if (!(c.xi_max > c.xi_min) || c.xi_count < 2) throw ConfigError("key 'stability.xi_max' must exceed xi_min with xi_count >= 2");
        for (std::size_t n : c.ruc_n)
            if (n < 2) throw ConfigError("key 'stability.ruc_n' entries must be >= 2");
    }

    if (doc.contains("minimize")) {
        const auto& m = doc.at("minimize");
        reject_unknown(m, "minimize", {"n", "init", "max_iter", "grad_tol", "window", "growth_factor",
                                       "cluster_gap_ratio"});
        auto& c = cfg.minimize;
        c.n = get_size(m, "minimize", "n", c.n);
        if (m.contains("init")) {
            if (!m.at("init").is_string()) throw ConfigError("key 'minimize.init' must be a string");
            try {
                c.init = parse_init(m.at("init").get<std::string>());
            } catch (const InvalidArgument&) {
                throw ConfigError("key 'minimize.init' must be lattice, random_ball or two_cluster");
            }
        }
        c.max_iter = get_size(m, "minimize", "max_iter", c.max_iter);
        c.grad_tol = get_double(m, "minimize", "grad_tol", c.grad_tol);
        c.window = get_size(m, "minimize", "window", c.window);
        c.growth_factor = get_double(m, "minimize", "growth_factor", c.growth_factor);
        c.cluster_gap_ratio = get_double(m, "minimize", "cluster_gap_ratio", c.cluster_gap_ratio);
        if (c.grad_tol < 0.0) throw ConfigError("key 'minimize.grad_tol' must be nonnegative");
        require_positive(c.growth_factor, "minimize.growth_factor");
        require_positive(c.cluster_gap_ratio, "minimize.cluster_gap_ratio");
    }
    if (cfg.minimize.n < 2) throw ConfigError("key 'minimize.n' must be >= 2");

    if (doc.contains("scan")) {
        const auto& s = doc.at("scan");
        reject_unknown(s, "scan", {"grid", "stability"});
        if (s.contains("stability")) {
            if (!s.at("stability").is_boolean()) throw ConfigError("key 'scan.stability' must be a boolean");
            cfg.scan.stability = s.at("stability").get<bool>();
        }
        if (s.contains("grid")) {
            const auto& g = s.at("grid");
            if (!g.is_object()) throw ConfigError("key 'scan.grid' must be an object");
            for (const auto& [name, values] : g.items()) {
                const std::string where = "scan.grid." + name;
                bool known = name == "N";
                for (const auto& [k, v] : cfg.potential.params) known |= k == name;
                if (!known) throw ConfigError("unknown key '" + where + "' for family " + cfg.potential.family);
                if (!values.is_array() || values.empty()) throw ConfigError("key '" + where + "' must be a nonempty array");
                std::vector<double> list;
                for (const auto& x : values) {
                    if (!x.is_number()) throw ConfigError("key '" + where + "' must hold numbers");
                    list.push_back(x.get<double>());
                }
                cfg.scan.grid.emplace_back(name, list);
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace nli::cli
