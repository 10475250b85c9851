#pragma once

#include "gyrocomp/bloch.hpp"
#include "gyrocomp/optics.hpp"
#include "gyrocomp/quantities.hpp"

namespace gyrocomp::serf {

/// Single-species SERF comagnetometer operated at its self-compensation point.
struct SerfConfig {
  SpeciesParams nuclear;
  SpeciesParams alkali;
  ProbeConfig probe;
  double k = 0.0;     // T per unit nuclear polarization
  double b_az = 0.0;  // T, alkali magnetization field seen by the nuclei
  double b_z = 0.0;   // T, applied compensation coil field
  double b_y = 0.0;   // T, residual transverse field
  double p0 = 1.0;    // alkali polarization
  double pnz = 0.0;   // nuclear longitudinal polarization

  void validate() const;
  bloch::BlochParams<double> alkali_params() const;
  bloch::BlochParams<double> nuclear_params() const;
};

/// Bundled Cs-Xe configuration with b_z at the compensation point.
SerfConfig default_config();

/// B_z = B_az + B_nz.
double compensation_point(double b_az, double b_nz);

/// Compensation equation: B_y = k P_ny - Omega / gamma_n.
double compensation_field(double k, double p_ny, RotationRate omega_y, GyromagneticRatio gamma_n);

/// B_ay = B_y + Omega / gamma_a - k P_ny.
double effective_alkali_field(double b_y, RotationRate omega_y, GyromagneticRatio gamma_a, double k, double p_ny);

/// presignal(serf_alkali_px(effective_alkali_field(...))), mA.
double output_signal(const SerfConfig& cfg, double b_y, double p_ny, RotationRate omega_y,
                     Warnings* warnings = nullptr);

/// H P0 T2a [gamma_a k P_ny - (gamma_a B_y + Omega)], evaluated directly.
double output_signal_closed_form(const SerfConfig& cfg, double b_y, double p_ny, RotationRate omega_y);

/// Nuclear P_ny from the approximate steady state at cfg.b_z under the residual field cfg.b_y.
double steady_nuclear_pny(const SerfConfig& cfg, RotationRate omega_y);

/// Output with the nuclei in their steady state, the realized sensor response.
double self_compensated_output(const SerfConfig& cfg, RotationRate omega_y, Warnings* warnings = nullptr);

/// gamma_a / gamma_n - 1.
double enhancement_factor(const SerfConfig& cfg);

/// H P0 T2a (gamma_a / gamma_n - 1), mA per rad/s (signed).
double scale_factor(const SerfConfig& cfg);

}  // namespace gyrocomp::serf
