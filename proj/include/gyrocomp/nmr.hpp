#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gyrocomp/bloch.hpp"
#include "gyrocomp/optics.hpp"
#include "gyrocomp/quantities.hpp"

namespace gyrocomp::nmr {

/// Dual-species NMR gyroscope. species1 stabilizes the field, species2 senses rotation, the alkali probes.
struct NmrConfig {
  SpeciesParams species1;
  SpeciesParams species2;
  SpeciesParams alkali;
  ProbeConfig probe;
  double b1_setpoint = 2000e-9;  // T, stabilized equivalent field of species1
  double b_y = 2000e-9;          // T, total field along y
  double b_n2 = 0.0;             // T, species2 magnetization
  double w2m = 0.0;              // rad/s, applied modulation frequency
  double psi = 0.0;              // rad, precession phase relative to the modulation
  double p0 = 1.0;               // alkali polarization
  std::optional<double> b_xz;    // T; defaults to optimal_transverse_drive

  void validate() const;
  /// Transverse magnetization used by the closed forms.
  double transverse_field() const;
};

/// Bundled Cs-Xe configuration with w2m = B1 gamma_n2 and b_n2 from the 129Xe magnetization.
NmrConfig default_config();

/// Compensation equation: B_y = B1 - Omega / gamma_n1.
double compensation_field(double b1, RotationRate omega_y, GyromagneticRatio gamma_n1);

/// T2n2 [w2m - (B_y gamma_n2 + Omega)], the small-angle precession phase.
double phase_lag(const NmrConfig& cfg, RotationRate omega_y);

/// H P0 (B_xz / B_y) sin(psi) using cfg.psi.
double quadrature_from_phase(const NmrConfig& cfg);

/// Closed-form quadrature H P0 (B_xz / B_y) T2n2 [w2m - (B_y gamma_n2 + Omega)], mA.
/// Warns when the phase leaves the small-angle regime (|phase| >= 0.1).
double quadrature_output(const NmrConfig& cfg, RotationRate omega_y, Warnings* warnings = nullptr);

/// Quadrature with the field servo engaged: B_y follows compensation_field(b1_setpoint, Omega, gamma_n1).
double compensated_output(const NmrConfig& cfg, RotationRate omega_y, Warnings* warnings = nullptr);

/// (b_n2 / 2) sqrt(t2 / t1).
double optimal_transverse_drive(double b_n2, const RelaxationPair& relaxation);

/// Coefficient of Omega in the compensated output, mA per rad/s (signed).
double scale_factor(const NmrConfig& cfg);

/// gamma_n2 / gamma_n1 - 1.
double enhancement_factor(const NmrConfig& cfg);

struct LockInConfig {
  double reference_freq = 0.0;   // rad/s, sign follows the modulation
  double reference_phase = 0.0;  // rad
  double lowpass_cutoff = 0.0;   // rad/s; 0 selects |reference_freq| / 100

  double cutoff() const;
};

struct LockInOutput {
  double in_phase = 0.0;
  double quadrature = 0.0;

  double phase() const;
  double amplitude() const;
};

/// Mixes with 2 cos and -2 sin of the reference, single-pole low-pass filters, and averages the settled filter
/// output over whole reference periods, so A cos(w t + psi) yields (A cos psi, A sin psi).
LockInOutput lock_in_demodulate(std::span<const double> samples, double sample_period, const LockInConfig& cfg);

/// Presignal samples of the modulated probe signal with the precession phase from phase_lag.
std::vector<double> synthesize_presignal(const NmrConfig& cfg, RotationRate omega_y, double sample_period,
                                         double duration);

/// Discrete PI servo on the coil field. Stable for ki * sample_period in (0, 2 - 2 kp) with |kp| < 1.
struct ServoConfig {
  double kp = 0.1;
  double ki = 50.0;              // 1/s
  double sample_period = 0.01;   // s
  double setpoint = 2000e-9;     // T
  double frequency_noise = 0.0;  // rad/s rms white noise on the Larmor readout
  std::uint64_t seed = 1;

  void validate() const;
};

struct LoopSample {
  double t;           // s
  double coil_field;  // T
  double omega1;      // rad/s, measured species1 Larmor frequency
  double output;      // mA
};

using AmbientFn = std::function<double(double)>;
using RotationFn = std::function<RotationRate(double)>;

/// Closed-loop stabilization of species1. Throws DivergenceError once |coil| > 10 |setpoint|.
std::vector<LoopSample> run_closed_loop(const NmrConfig& cfg, const ServoConfig& servo, const AmbientFn& ambient_by,
                                        const RotationFn& omega, double duration);

}  // namespace gyrocomp::nmr
