#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nli/groundstate.hpp"
#include "nli/potential.hpp"

namespace nli::cli {

/// Bad config file or command line; maps to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PotentialSpec {
    std::string family = "morse";
    int dimension = 1;
    /// Numeric parameters by name (a, r, G, L, coefficient, exponent).
    std::vector<std::pair<std::string, double>> params;
    std::vector<GaussianTerm> terms;
    std::filesystem::path csv;

    RadialPotential build() const;
    /// Copy with one numeric parameter (or "N") replaced.
    PotentialSpec with(const std::string& name, double value) const;
};

struct StabilityConfig {
    std::vector<std::string> criteria{"integral", "gaussian_weighted", "fourier", "ruc_search"};
    double p_min = 1e-3;
    double p_max = 1e3;
    std::size_t p_count = 200;
    double xi_min = 1e-2;
    double xi_max = 1e2;
    std::size_t xi_count = 160;
    std::vector<std::size_t> ruc_n{8, 16, 32, 64};
    std::size_t ruc_budget = 2000;
    std::size_t max_witness_cells = 600000;
};

struct MinimizeConfig {
    std::size_t n = 64;
    Init init = Init::Lattice;
    std::size_t max_iter = 10000;
    double grad_tol = 1e-12;
    std::size_t window = 0;
    double growth_factor = 2.0;
    double cluster_gap_ratio = 3.0;
};

struct ScanConfig {
    /// Parameter name and its values; cells are the Cartesian product with
    /// the last parameter varying fastest.
    std::vector<std::pair<std::string, std::vector<double>>> grid;
    bool stability = true;
};

struct RunConfig {
    PotentialSpec potential;
    std::filesystem::path output_dir = "out";
    std::vector<std::uint64_t> seeds{1};
    double quad_tol = 1e-8;
    double verdict_tol = 1e-6;
    unsigned threads = 0;
    StabilityConfig stability;
    MinimizeConfig minimize;
    ScanConfig scan;
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// out-of-range values throw ConfigError naming the key. Relative paths are
/// resolved against base_dir.
RunConfig parse_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace nli::cli
