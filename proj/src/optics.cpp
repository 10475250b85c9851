#include "gyrocomp/optics.hpp"

#include <cmath>
#include <sstream>

namespace gyrocomp {

double lorentzian_d(double detune, double delta_nu) {
  if (!(delta_nu > 0.0)) throw ConfigError("linewidth must be > 0");
  const double half = 0.5 * delta_nu;
  return detune / (detune * detune + half * half);
}

double lorentzian_d_slope(double detune, double delta_nu) {
  if (!(delta_nu > 0.0)) throw ConfigError("linewidth must be > 0");
  const double half2 = 0.25 * delta_nu * delta_nu;
  const double denom = detune * detune + half2;
  return (half2 - detune * detune) / (denom * denom);
}

double detection_factor_h(const ProbeConfig& p) {
  p.validate();
  return p.i0 * p.n * p.l * p.c * p.r_e * p.f * lorentzian_d(p.detune, p.delta_nu);
}

double presignal(const ProbeConfig& p, double px) {
  if (!(std::abs(px) <= 1.0)) {
    std::ostringstream msg;
    msg << "transverse polarization " << px << " outside [-1, 1]";
    throw PreconditionError(msg.str());
  }
  return detection_factor_h(p) * px;
}

}  // namespace gyrocomp
