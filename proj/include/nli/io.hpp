#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nli/energy.hpp"
#include "nli/groundstate.hpp"
#include "nli/measure.hpp"
#include "nli/potential.hpp"
#include "nli/stability.hpp"

namespace nli::io {

using Json = nlohmann::ordered_json;

/// Finite values as numbers, infinities as "+inf"/"-inf", NaN as null.
Json number(double x);

/// Shortest round-trip text for a double; "+inf", "-inf" or "nan" otherwise.
std::string format_double(double x);

Json to_json(const EnergyReport& r);
Json to_json(const HypothesisReport& r);
/// certificate_path is stored verbatim (empty for none).
Json to_json(const StabilityVerdict& v, const std::string& certificate_path);

/// Columns x_1..x_N,weight.
void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& mu);
PointCloud read_point_cloud_csv(const std::filesystem::path& path);

/// Positive cells only: columns x_1..x_N (cell centre), density, plus the
/// grid geometry in a "# " comment line before the header.
void write_grid_csv(const std::filesystem::path& path, const GridDensity& rho);

/// Columns iteration,energy,q90_radius,max_pair_distance,step,median_nn_distance,max_ball_mass.
void write_trace_csv(const std::filesystem::path& path, const MinimizationTrace& trace);

/// Two columns radius,value with a header row.
Tabulated read_tabulated_csv(const std::filesystem::path& path);

/// Writes text with LF line endings, replacing the file.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nli::io
