#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gyrocomp/nmr.hpp"
#include "gyrocomp/quantities.hpp"
#include "gyrocomp/serf.hpp"

namespace gyrocomp {

/// Fully resolved parameter set. Keys absent from the file fall back to the Cs-Xe defaults, and
/// derived quantities (B_n2, k, w2m, the compensation point) are computed from the resolved inputs.
struct Configuration {
  SpeciesParams cs;
  SpeciesParams xe129;
  SpeciesParams xe131;
  double kappa0 = 880.0;
  double optical_power_mw = 1.0;
  double responsivity_ma_per_mw = 0.6;
  nmr::NmrConfig nmr;
  serf::SerfConfig serf;
  nmr::ServoConfig servo;
  std::vector<Provenance> provenance;
  Warnings warnings;

  /// Resolved values keyed as `section.key`, as they would be written to a config file.
  std::map<std::string, double> snapshot() const;
};

/// Sections [cs] [xe129] [xe131] [magnetization] [probe] [nmr] [serf] [servo]; `;` or `#` comments.
/// `overrides` entries look like `section.key=value` and win over the file. Throws ConfigError.
Configuration parse_configuration(std::istream& in, std::span<const std::string> overrides = {});

/// Reads `path` when given, otherwise starts from the bundled defaults.
Configuration load_configuration(const std::optional<std::filesystem::path>& path,
                                 std::span<const std::string> overrides = {});

/// Every accepted `section.key`.
const std::vector<std::string>& configuration_keys();

}  // namespace gyrocomp
