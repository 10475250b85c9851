#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gyrocomp/quantities.hpp"

namespace gyrocomp::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kModelError = 3, kDivergence = 4 };

/// Dispatches `args` (without the program name). Reports go to `out` unless --out is given.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// (t, ambient B_y, Omega) rows, linearly interpolated and held past both ends.
struct DisturbanceTable {
  std::vector<double> t;        // s
  std::vector<double> ambient;  // T
  std::vector<double> omega;    // rad/s

  double ambient_at(double time) const;
  RotationRate omega_at(double time) const;
};

/// CSV with columns t_s, ambient_by_t, omega_rad_per_s; a non-numeric first line is taken as the header.
DisturbanceTable read_disturbance_csv(std::istream& in);

/// `start:stop:count` (linear), or `log:start:stop:count` / `logSTART:logSTOP:count` (geometric between the
/// endpoint values).
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gyrocomp::cli
