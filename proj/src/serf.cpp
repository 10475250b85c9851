#include "gyrocomp/serf.hpp"

#include <cmath>

namespace gyrocomp::serf {

void SerfConfig::validate() const {
  nuclear.validate();
  alkali.validate();
  probe.validate();
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("SERF k must be >= 0");
  if (!(pnz >= 0.0 && pnz <= 1.0)) throw ConfigError("SERF pnz must lie in [0, 1]");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("SERF alkali p0 must lie in [0, 1]");
  if (!std::isfinite(b_az) || !std::isfinite(b_z) || !std::isfinite(b_y)) {
    throw ConfigError("SERF fields must be finite");
  }
}

bloch::BlochParams<double> SerfConfig::alkali_params() const { return bloch::make_params(alkali, p0); }
bloch::BlochParams<double> SerfConfig::nuclear_params() const { return bloch::make_params(nuclear, pnz); }

SerfConfig default_config() {
  const Table2Defaults d = load_table2_defaults();
  SerfConfig cfg;
  cfg.nuclear = d.xe129;
  cfg.alkali = d.cs;
  cfg.probe = d.probe;
  cfg.k = magnetization_ratio(d.xe129_magnetization());
  cfg.pnz = d.xe129.polarization;
  cfg.p0 = d.cs.polarization;
  cfg.b_az = 0.0;
  cfg.b_z = compensation_point(cfg.b_az, cfg.k * cfg.pnz);
  return cfg;
}

double compensation_point(double b_az, double b_nz) { return b_az + b_nz; }

double compensation_field(double k, double p_ny, RotationRate omega_y, GyromagneticRatio gamma_n) {
  return k * p_ny - rotation_equivalent_field(omega_y, gamma_n);
}

double effective_alkali_field(double b_y, RotationRate omega_y, GyromagneticRatio gamma_a, double k, double p_ny) {
  // the two large terms cancel first when the compensation equation nearly holds
  return (b_y - k * p_ny) + rotation_equivalent_field(omega_y, gamma_a);
}

double output_signal(const SerfConfig& cfg, double b_y, double p_ny, RotationRate omega_y, Warnings* warnings) {
  cfg.validate();
  const double b_ay = effective_alkali_field(b_y, omega_y, cfg.alkali.gamma, cfg.k, p_ny);
  return presignal(cfg.probe, bloch::serf_alkali_px(b_ay, cfg.alkali_params(), warnings));
}

double output_signal_closed_form(const SerfConfig& cfg, double b_y, double p_ny, RotationRate omega_y) {
  cfg.validate();
  const double gamma_a = cfg.alkali.gamma.angular();
  return detection_factor_h(cfg.probe) * cfg.p0 * cfg.alkali.relaxation.t2 *
         (gamma_a * cfg.k * p_ny - (gamma_a * b_y + omega_y.rad_per_s()));
}

double steady_nuclear_pny(const SerfConfig& cfg, RotationRate omega_y) {
  cfg.validate();
  return bloch::serf_nuclear_pny(0.0, cfg.b_y, cfg.b_z, cfg.b_az, omega_y, cfg.nuclear_params(),
                                 bloch::Form::Approximate);
}

double self_compensated_output(const SerfConfig& cfg, RotationRate omega_y, Warnings* warnings) {
  return output_signal(cfg, cfg.b_y, steady_nuclear_pny(cfg, omega_y), omega_y, warnings);
}

double enhancement_factor(const SerfConfig& cfg) {
  if (cfg.nuclear.gamma.angular() == 0.0) throw SingularConfigurationError("gamma_n = 0");
  return cfg.alkali.gamma.angular() / cfg.nuclear.gamma.angular() - 1.0;
}

double scale_factor(const SerfConfig& cfg) {
  cfg.validate();
  return detection_factor_h(cfg.probe) * cfg.p0 * cfg.alkali.relaxation.t2 * enhancement_factor(cfg);
}

}  // namespace gyrocomp::serf
