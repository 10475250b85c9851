#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "gyrocomp/errors.hpp"

namespace gyrocomp {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kVacuumPermeability = 4.0e-7 * std::numbers::pi;  // Wb/(A m)
inline constexpr double kRadPerSecPerDegPerHour = std::numbers::pi / (180.0 * 3600.0);

/// Angular gyromagnetic ratio in rad s^-1 T^-1. Tabulated values are cyclic (MHz/T).
class GyromagneticRatio {
 public:
  constexpr GyromagneticRatio() = default;

  static constexpr GyromagneticRatio from_angular(double rad_per_s_per_t) {
    return GyromagneticRatio(rad_per_s_per_t);
  }
  static constexpr GyromagneticRatio from_cyclic_mhz_per_t(double mhz_per_t) {
    return GyromagneticRatio(mhz_per_t * 1.0e6 * kTwoPi);
  }

  constexpr double angular() const { return value_; }
  constexpr double cyclic_hz_per_t() const { return value_ / kTwoPi; }
  constexpr double cyclic_mhz_per_t() const { return value_ / (kTwoPi * 1.0e6); }

  constexpr GyromagneticRatio operator-() const { return GyromagneticRatio(-value_); }

 private:
  explicit constexpr GyromagneticRatio(double v) : value_(v) {}
  double value_ = 0.0;
};

/// Frame rotation rate about the sensitive axis, stored in rad/s.
class RotationRate {
 public:
  constexpr RotationRate() = default;

  static constexpr RotationRate from_rad_per_s(double v) { return RotationRate(v); }
  static constexpr RotationRate from_deg_per_hour(double v) {
    return RotationRate(v * kRadPerSecPerDegPerHour);
  }

  constexpr double rad_per_s() const { return value_; }
  constexpr double deg_per_hour() const { return value_ / kRadPerSecPerDegPerHour; }

  constexpr RotationRate operator-() const { return RotationRate(-value_); }
  friend constexpr RotationRate operator+(RotationRate a, RotationRate b) {
    return RotationRate(a.value_ + b.value_);
  }

 private:
  explicit constexpr RotationRate(double v) : value_(v) {}
  double value_ = 0.0;
};

/// Longitudinal (t1) and transverse (t2) relaxation times in seconds.
struct RelaxationPair {
  double t1 = 1.0;
  double t2 = 1.0;

  RelaxationPair() = default;
  /// Throws ConfigError unless both times are positive; notes t2 > t1 in `warnings`.
  RelaxationPair(double t1_s, double t2_s, Warnings* warnings = nullptr);

  bool unphysical_ordering() const { return t2 > t1; }
};

struct SpeciesParams {
  std::string name;
  GyromagneticRatio gamma;
  RelaxationPair relaxation;
  double magnetic_moment = 0.0;  // J/T
  double density = 0.0;          // m^-3
  double polarization = 0.0;

  void validate() const;
};

struct MagnetizationParams {
  double kappa0 = 1.0;
  double mu0 = kVacuumPermeability;
  double moment = 0.0;        // J/T
  double density = 0.0;       // m^-3
  double polarization = 0.0;

  void validate() const;
};

/// Probe beam and vapour parameters entering the detection factor H.
struct ProbeConfig {
  double i0 = 0.6;               // mA
  double n = 0.0;                // m^-3
  double l = 0.01;               // m
  double f = 0.347;
  double nu0 = 0.0;              // Hz
  double delta_nu = 66.23e6;     // Hz, FWHM
  double detune = 33.115e6;      // Hz, nu - nu0
  double c = 3.0e8;              // m/s
  double r_e = 2.82e-15;         // m

  void validate() const;
};

/// i0 is the product of optical power and photodetector responsivity.
inline double photocurrent_ma(double optical_power_mw, double responsivity_ma_per_mw) {
  return optical_power_mw * responsivity_ma_per_mw;
}

/// One annotation per bundled default that differs from the printed table entry
/// or fills a gap the table leaves.
struct Provenance {
  enum class Kind { Reconciled, Assumed };
  Kind kind;
  std::string parameter;
  std::string printed;
  std::string adopted;
  std::string reason;
};

/// Bundled Cs-Xe parameter set.
struct Table2Defaults {
  SpeciesParams cs;
  SpeciesParams xe129;
  SpeciesParams xe131;
  ProbeConfig probe;
  double optical_power_mw = 1.0;
  double responsivity_ma_per_mw = 0.6;
  double kappa0 = 880.0;
  double b_y = 2000e-9;  // T, coil field along y
  std::vector<Provenance> provenance;

  MagnetizationParams xe129_magnetization() const;
};

Table2Defaults load_table2_defaults();

/// Signed Larmor frequency gamma * b, rad/s.
constexpr double larmor_frequency(GyromagneticRatio gamma, double b) { return gamma.angular() * b; }

/// Rotation-equivalent field Omega / gamma, T.
constexpr double rotation_equivalent_field(RotationRate omega, GyromagneticRatio gamma) {
  return omega.rad_per_s() / gamma.angular();
}

/// Magnetization-to-polarization ratio k = (8 pi kappa0 mu0 / 3) mu n, T.
double magnetization_ratio(const MagnetizationParams& p);

/// Nuclear magnetization field sensed by the alkali, k * P, T.
double nuclear_magnetization(const MagnetizationParams& p);

}  // namespace gyrocomp
