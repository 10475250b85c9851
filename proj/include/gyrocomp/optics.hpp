#pragma once

#include "gyrocomp/quantities.hpp"

namespace gyrocomp {

/// Dispersive Lorentzian (nu - nu0) / ((nu - nu0)^2 + (dnu/2)^2), in s. Peaks at 1/dnu for detune = dnu/2.
double lorentzian_d(double detune, double delta_nu);

/// Derivative of lorentzian_d with respect to detune.
double lorentzian_d_slope(double detune, double delta_nu);

/// Detection factor H = I0 n l c r_e f D(nu), mA per unit polarization. Excludes P0.
double detection_factor_h(const ProbeConfig& p);

/// Polarimeter signal H * px, mA. Same form for both gyroscopes.
double presignal(const ProbeConfig& p, double px);

}  // namespace gyrocomp
