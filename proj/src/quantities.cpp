#include "gyrocomp/quantities.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gyrocomp {
namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

RelaxationPair::RelaxationPair(double t1_s, double t2_s, Warnings* warnings) : t1(t1_s), t2(t2_s) {
  if (!finite_positive(t1) || !finite_positive(t2)) {
    std::ostringstream msg;
    msg << "relaxation times must be positive (t1=" << t1 << " s, t2=" << t2 << " s)";
    throw ConfigError(msg.str());
  }
  if (t2 > t1) {
    std::ostringstream msg;
    msg << "relaxation ordering t2=" << t2 << " s > t1=" << t1 << " s is unphysical";
    warn(warnings, msg.str());
  }
}

void SpeciesParams::validate() const {
  if (!std::isfinite(gamma.angular())) throw ConfigError(name + ": gyromagnetic ratio is not finite");
  if (!finite_positive(relaxation.t1) || !finite_positive(relaxation.t2)) {
    throw ConfigError(name + ": relaxation times must be positive");
  }
  if (!(density >= 0.0) || !std::isfinite(density)) throw ConfigError(name + ": density must be >= 0");
  if (!(polarization >= 0.0 && polarization <= 1.0)) {
    throw ConfigError(name + ": polarization must lie in [0, 1]");
  }
  if (!std::isfinite(magnetic_moment)) throw ConfigError(name + ": magnetic moment is not finite");
}

void MagnetizationParams::validate() const {
  if (!finite_positive(kappa0)) throw ConfigError("kappa0 must be positive");
  if (mu0 != kVacuumPermeability) throw ConfigError("mu0 is fixed at 4 pi 1e-7 Wb/(A m)");
  if (!(density >= 0.0) || !std::isfinite(density)) throw ConfigError("magnetization density must be >= 0");
  if (!(polarization >= 0.0 && polarization <= 1.0)) {
    throw ConfigError("magnetization polarization must lie in [0, 1]");
  }
  if (!std::isfinite(moment)) throw ConfigError("magnetic moment is not finite");
}

void ProbeConfig::validate() const {
  if (!(i0 >= 0.0) || !std::isfinite(i0)) throw ConfigError("probe i0 must be >= 0");
  if (!finite_positive(l)) throw ConfigError("probe path length must be > 0");
  if (!finite_positive(delta_nu)) throw ConfigError("probe linewidth must be > 0");
  if (!(f > 0.0 && f <= 1.0)) throw ConfigError("oscillator strength must lie in (0, 1]");
  if (!(n >= 0.0) || !std::isfinite(n)) throw ConfigError("alkali density must be >= 0");
  if (!std::isfinite(detune) || !finite_positive(c) || !finite_positive(r_e)) {
    throw ConfigError("probe detune, c and r_e must be finite (c, r_e > 0)");
  }
}

MagnetizationParams Table2Defaults::xe129_magnetization() const {
  MagnetizationParams m;
  m.kappa0 = kappa0;
  m.moment = xe129.magnetic_moment;
  m.density = xe129.density;
  m.polarization = xe129.polarization;
  return m;
}

Table2Defaults load_table2_defaults() {
  Table2Defaults d;
  using Kind = Provenance::Kind;

  d.cs.name = "Cs";
  d.cs.gamma = GyromagneticRatio::from_cyclic_mhz_per_t(3500.0);
  d.cs.relaxation = RelaxationPair(3.33e-3, 3.33e-3);
  d.cs.density = 4.91e19;
  d.cs.polarization = 1.0;
  d.provenance.push_back({Kind::Reconciled, "cs.density_per_m3", "4.91e9 (no unit)", "4.91e19 m^-3",
                          "unit-consistent SI evaluation of H reproduces the quoted SERF scale factor"});
  d.provenance.push_back({Kind::Assumed, "cs.t1_s", "not tabulated", "3.33e-3 s",
                          "spin-destruction limited; longitudinal taken equal to transverse"});
  d.provenance.push_back({Kind::Assumed, "cs.polarization", "not tabulated", "1",
                          "reproduction mode: the quoted scale factors omit P0"});

  d.xe129.name = "Xe129";
  d.xe129.gamma = GyromagneticRatio::from_cyclic_mhz_per_t(-11.86);
  d.xe129.relaxation = RelaxationPair(60.0, 16.4);
  d.xe129.magnetic_moment = 0.84e-26;
  d.xe129.density = 9.38e22;
  d.xe129.polarization = 0.02;
  d.provenance.push_back({Kind::Reconciled, "xe129.t1_s/xe129.t2_s",
                          "T2n2 labelled longitudinal (16.4 s), T1n2 labelled transverse (60 s)",
                          "t2 = 16.4 s, t1 = 60 s",
                          "symbols bound as used in the scale-factor formula; keeps t1 >= t2"});

  d.xe131.name = "Xe131";
  d.xe131.gamma = GyromagneticRatio::from_cyclic_mhz_per_t(3.52);
  d.xe131.relaxation = RelaxationPair(16.4, 16.4);
  d.provenance.push_back({Kind::Assumed, "xe131.t1_s/xe131.t2_s", "not tabulated", "16.4 s",
                          "placeholder; the stabilisation species relaxation enters no closed form"});

  d.probe.i0 = photocurrent_ma(d.optical_power_mw, d.responsivity_ma_per_mw);
  d.probe.n = d.cs.density;
  d.probe.l = 0.01;
  d.probe.c = 3.0e8;
  d.probe.r_e = 2.82e-15;
  d.probe.f = 0.347;
  d.probe.delta_nu = 66.23e6;
  d.probe.detune = d.probe.delta_nu / 2.0;
  return d;
}

double magnetization_ratio(const MagnetizationParams& p) {
  return 8.0 * std::numbers::pi * p.kappa0 * p.mu0 / 3.0 * p.moment * p.density;
}

double nuclear_magnetization(const MagnetizationParams& p) { return magnetization_ratio(p) * p.polarization; }

}  // namespace gyrocomp
