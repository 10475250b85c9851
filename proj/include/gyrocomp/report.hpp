#pragma once

#include <json.hpp>

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gyrocomp/analysis.hpp"
#include "gyrocomp/config.hpp"
#include "gyrocomp/nmr.hpp"

namespace gyrocomp::report {

inline constexpr const char* kToolVersion = "0.3.0";

/// Provenance of one output file: command, config, resolved parameters, version, and the only timestamp.
struct RunManifest {
  std::string command;
  std::string config_path;  // empty when running on defaults
  std::map<std::string, double> parameters;
  std::string tool_version = kToolVersion;
  std::string timestamp;  // ISO 8601 UTC
};

RunManifest make_manifest(std::string command, std::string config_path, const Configuration& cfg);

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const Provenance& p);
nlohmann::json to_json(const analysis::Discrepancy& d);
nlohmann::json to_json(const analysis::ScaleFactorReport& r);
nlohmann::json to_json(const analysis::ComparisonReport& r);
nlohmann::json to_json(const analysis::ErrorBudget& b);

/// Aligned-column plain text renderings.
std::string to_text(const analysis::ScaleFactorReport& r);
std::string to_text(const analysis::ComparisonReport& r);
std::string to_text(const analysis::ErrorBudget& b);

/// `value_<unit>,scale_factor_ma_per_rad_per_s,scale_factor_ma_per_deg_per_h,enhancement_factor_1,error`.
void write_sweep_csv(std::ostream& os, const analysis::ParameterInfo& param, std::span<const analysis::SweepRow> rows);

/// `t_s,coil_field_t,omega1_rad_per_s,output_ma`.
void write_loop_csv(std::ostream& os, std::span<const nmr::LoopSample> samples);

/// Whitespace-separated x/y pairs with a `#` header line.
void write_plot_data(std::ostream& os, const std::string& x_label, const std::string& y_label,
                     std::span<const double> x, std::span<const double> y);

/// Identifier safe for a column name: `rad/(s T)` -> `rad_per_s_t`.
std::string unit_suffix(const std::string& unit);

}  // namespace gyrocomp::report
