#include "gyrocomp/nmr.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gyrocomp::nmr {

void NmrConfig::validate() const {
  species1.validate();
  species2.validate();
  alkali.validate();
  probe.validate();
  if (!(b_y > 0.0)) throw SingularConfigurationError("NMR B_y must be > 0 (scale factor has 1/B_y)");
  if (!(std::abs(psi) < std::numbers::pi)) throw ConfigError("NMR psi must satisfy |psi| < pi");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("NMR alkali p0 must lie in [0, 1]");
  if (!std::isfinite(b1_setpoint) || !std::isfinite(b_n2) || !std::isfinite(w2m)) {
    throw ConfigError("NMR fields and modulation frequency must be finite");
  }
}

double NmrConfig::transverse_field() const {
  return b_xz.value_or(optimal_transverse_drive(b_n2, species2.relaxation));
}

NmrConfig default_config() {
  const Table2Defaults d = load_table2_defaults();
  NmrConfig cfg;
  cfg.species1 = d.xe131;
  cfg.species2 = d.xe129;
  cfg.alkali = d.cs;
  cfg.probe = d.probe;
  cfg.b_y = d.b_y;
  cfg.b1_setpoint = d.b_y;
  cfg.b_n2 = nuclear_magnetization(d.xe129_magnetization());
  cfg.w2m = larmor_frequency(cfg.species2.gamma, cfg.b1_setpoint);
  cfg.p0 = d.cs.polarization;
  return cfg;
}

double compensation_field(double b1, RotationRate omega_y, GyromagneticRatio gamma_n1) {
  return b1 - rotation_equivalent_field(omega_y, gamma_n1);
}

double phase_lag(const NmrConfig& cfg, RotationRate omega_y) {
  return cfg.species2.relaxation.t2 *
         (cfg.w2m - (larmor_frequency(cfg.species2.gamma, cfg.b_y) + omega_y.rad_per_s()));
}

namespace {

double signal_amplitude(const NmrConfig& cfg) {
  cfg.validate();
  return detection_factor_h(cfg.probe) * cfg.p0 * cfg.transverse_field() / cfg.b_y;
}

}  // namespace

double quadrature_from_phase(const NmrConfig& cfg) { return signal_amplitude(cfg) * std::sin(cfg.psi); }

double quadrature_output(const NmrConfig& cfg, RotationRate omega_y, Warnings* warnings) {
  const double amplitude = signal_amplitude(cfg);
  const double phase = phase_lag(cfg, omega_y);
  if (std::abs(phase) >= 0.1) {
    std::ostringstream msg;
    msg << "NMR precession phase " << phase << " rad outside the small-angle regime";
    warn(warnings, msg.str());
  }
  return amplitude * phase;
}

double compensated_output(const NmrConfig& cfg, RotationRate omega_y, Warnings* warnings) {
  NmrConfig engaged = cfg;
  engaged.b_y = compensation_field(cfg.b1_setpoint, omega_y, cfg.species1.gamma);
  return quadrature_output(engaged, omega_y, warnings);
}

double optimal_transverse_drive(double b_n2, const RelaxationPair& relaxation) {
  return 0.5 * b_n2 * std::sqrt(relaxation.t2 / relaxation.t1);
}

double enhancement_factor(const NmrConfig& cfg) {
  if (cfg.species1.gamma.angular() == 0.0) throw SingularConfigurationError("gamma_n1 = 0");
  return cfg.species2.gamma.angular() / cfg.species1.gamma.angular() - 1.0;
}

double scale_factor(const NmrConfig& cfg) {
  return signal_amplitude(cfg) * cfg.species2.relaxation.t2 * enhancement_factor(cfg);
}

double LockInConfig::cutoff() const {
  return lowpass_cutoff > 0.0 ? lowpass_cutoff : std::abs(reference_freq) / 100.0;
}

double LockInOutput::phase() const { return std::atan2(quadrature, in_phase); }
double LockInOutput::amplitude() const { return std::hypot(in_phase, quadrature); }

LockInOutput lock_in_demodulate(std::span<const double> samples, double sample_period, const LockInConfig& cfg) {
  const double omega = cfg.reference_freq;
  const double cutoff = cfg.cutoff();
  if (!(sample_period > 0.0)) throw PreconditionError("lock-in sample period must be > 0");
  if (omega == 0.0 || !std::isfinite(omega)) throw PreconditionError("lock-in reference frequency must be nonzero");
  if (!(cutoff < std::abs(omega) / 2.0)) throw PreconditionError("lock-in cutoff must be below reference / 2");
  const double sample_rate = 1.0 / sample_period;
  if (sample_rate < 10.0 * std::abs(omega) / kTwoPi) {
    std::ostringstream msg;
    msg << "lock-in sample rate " << sample_rate << " Hz below 10x reference " << std::abs(omega) / kTwoPi << " Hz";
    throw PreconditionError(msg.str());
  }
  const double tau = 1.0 / cutoff;
  const double record = static_cast<double>(samples.size()) * sample_period;
  if (record < 20.0 * tau) {
    std::ostringstream msg;
    msg << "lock-in record " << record << " s shorter than 20 low-pass time constants (" << 20.0 * tau << " s)";
    throw PreconditionError(msg.str());
  }

  const double alpha = 1.0 - std::exp(-cutoff * sample_period);
  const double period = kTwoPi / std::abs(omega);
  const auto periods = std::max(1.0, std::floor((record - 15.0 * tau) / period));
  const auto window = std::min(samples.size(), static_cast<std::size_t>(std::llround(periods * period / sample_period)));
  const std::size_t window_start = samples.size() - window;

  double x = 0.0;
  double y = 0.0;
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double arg = omega * sample_period * static_cast<double>(k) + cfg.reference_phase;
    x += alpha * (2.0 * samples[k] * std::cos(arg) - x);
    y += alpha * (-2.0 * samples[k] * std::sin(arg) - y);
    if (k >= window_start) {
      sum_x += x;
      sum_y += y;
    }
  }
  const auto n = static_cast<double>(window);
  return {sum_x / n, sum_y / n};
}

std::vector<double> synthesize_presignal(const NmrConfig& cfg, RotationRate omega_y, double sample_period,
                                         double duration) {
  cfg.validate();
  if (!(sample_period > 0.0) || !(duration > 0.0)) throw PreconditionError("synthesis grid must be positive");
  const double h = detection_factor_h(cfg.probe);
  const double psi = phase_lag(cfg, omega_y);
  const bloch::BlochParams<double> alkali = bloch::make_params(cfg.alkali, cfg.p0, Eigen::Vector3d::UnitY());
  const double b_xz = cfg.transverse_field();
  const auto n = static_cast<std::size_t>(std::llround(duration / sample_period));
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = sample_period * static_cast<double>(k);
    out[k] = h * bloch::nmr_modulated_px(b_xz, cfg.b_y, cfg.w2m, psi, t, alkali, bloch::Form::Approximate);
  }
  return out;
}

void ServoConfig::validate() const {
  if (!(sample_period > 0.0)) throw ConfigError("servo sample period must be > 0");
  if (!std::isfinite(kp) || !std::isfinite(ki)) throw ConfigError("servo gains must be finite");
  if (!(frequency_noise >= 0.0)) throw ConfigError("servo frequency noise must be >= 0");
  if (!std::isfinite(setpoint)) throw ConfigError("servo setpoint must be finite");
  if (setpoint == 0.0) throw SingularConfigurationError("servo setpoint B_1 = 0 leaves the Larmor reference undefined");
}

std::vector<LoopSample> run_closed_loop(const NmrConfig& cfg, const ServoConfig& servo, const AmbientFn& ambient_by,
                                        const RotationFn& omega, double duration) {
  cfg.validate();
  servo.validate();
  if (!(duration > 0.0)) throw PreconditionError("closed-loop duration must be > 0");

  const GyromagneticRatio gamma1 = cfg.species1.gamma;
  const double target_rate = larmor_frequency(gamma1, servo.setpoint);
  const double gain_i = servo.ki * servo.sample_period;
  std::mt19937_64 rng(servo.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Start at equilibrium for the initial disturbance.
  double integral = compensation_field(servo.setpoint, omega(0.0), gamma1) - ambient_by(0.0);
  double coil = integral;

  const auto steps = static_cast<std::size_t>(std::ceil(duration / servo.sample_period - 1e-9));
  std::vector<LoopSample> out;
  out.reserve(steps + 1);
  NmrConfig plant = cfg;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = servo.sample_period * static_cast<double>(k);
    const RotationRate rate = omega(t);
    const double ambient = ambient_by(t);
    double measured = larmor_frequency(gamma1, ambient + coil) + rate.rad_per_s();
    if (servo.frequency_noise > 0.0) measured += servo.frequency_noise * noise(rng);

    const double error = (target_rate - measured) / gamma1.angular();
    if (k > 0) {
      integral += gain_i * error;
      coil = servo.kp * error + integral;
    }
    if (!std::isfinite(coil) || std::abs(coil) > 10.0 * std::abs(servo.setpoint)) {
      std::ostringstream msg;
      msg << "servo diverged at t=" << t << " s (step " << k << "): coil field " << coil << " T exceeds 10x setpoint "
          << servo.setpoint << " T; kp=" << servo.kp << ", ki*Ts=" << gain_i;
      throw DivergenceError(msg.str(), t, coil);
    }
    plant.b_y = ambient + coil;
    const double output = plant.b_y > 0.0 ? quadrature_output(plant, rate) : std::nan("");
    out.push_back({t, coil, measured, output});
  }
  return out;
}

}  // namespace gyrocomp::nmr
