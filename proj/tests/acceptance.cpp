// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gyrocomp/analysis.hpp"
#include "gyrocomp/bloch.hpp"
#include "gyrocomp/cli.hpp"

using namespace gyrocomp;
using Eigen::Vector3d;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s  criterion %d  %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

nlohmann::json run_cli(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = cli::run(args, out, err);
  if (code != 0) return {};
  return nlohmann::json::parse(out.str());
}

void criterion_1() {
  const auto start = Clock::now();
  int code = 0;
  const auto j = run_cli({"scale-factor", "--model", "serf"}, code);
  const double elapsed = seconds_since(start);
  const double mag = code == 0 ? j["report"]["scale_factor_magnitude_ma_per_deg_per_h"].get<double>() : 0.0;
  const double rel = std::abs(mag / 6.24e-3 - 1.0);
  report(1, code == 0 && rel < 0.01 && elapsed < 1.0, "SERF scale factor",
         "|S| = " + fmt("%.6e", mag) + " mA/(deg/h), rel. diff from 6.24e-3 = " + fmt("%.2e", rel) +
             ", runtime " + fmt("%.3f", elapsed) + " s");
}

void criterion_2() {
  const double serf_e = serf::enhancement_factor(serf::default_config());
  const double nmr_e = nmr::enhancement_factor(nmr::default_config());
  const bool ok = std::abs(serf_e + 296.1) <= 0.1 && std::abs(nmr_e + 4.369) <= 0.001;
  report(2, ok, "enhancement factors",
         "gamma_a/gamma_n - 1 = " + fmt("%.4f", serf_e) + ", gamma_n2/gamma_n1 - 1 = " + fmt("%.5f", nmr_e));
}

void criterion_3() {
  int code = 0;
  const auto j = run_cli({"scale-factor", "--model", "nmr"}, code);
  if (code != 0) {
    report(3, false, "NMR scale factor", "scale-factor command exited with " + std::to_string(code));
    return;
  }
  const double mag = j["report"]["scale_factor_magnitude_ma_per_deg_per_h"].get<double>();
  const double ratio = mag / 4.05e-3;
  bool listed = false;
  bool labels = false;
  bool sign = false;
  for (const auto& d : j["report"]["discrepancies"]) {
    if (d["quantity"] != "nmr.scale_factor") continue;
    listed = std::abs(d["computed_ma_per_deg_per_h"].get<double>() - mag) <= 1e-15;
    for (const auto& c : d["candidate_causes"]) {
      const auto cause = c["cause"].get<std::string>();
      labels |= cause.find("T1/T2") != std::string::npos;
      sign |= cause.find("gamma sign") != std::string::npos;
    }
  }
  const bool ok = ratio < 3.0 && ratio > 1.0 / 3.0 && listed && labels && sign;
  report(3, ok, "NMR scale factor",
         "|S| = " + fmt("%.4e", mag) + " mA/(deg/h), ratio to 4.05e-3 = " + fmt("%.3f", ratio) +
             (listed && labels && sign ? ", ledger lists value with T1/T2 and gamma-sign causes"
                                       : ", ledger entry incomplete"));
}

struct OracleResult {
  double worst = 0.0;
  int draws = 0;
};

// Closed forms against long-time integration. The nuclear and modulated-alkali closed forms are evaluated in
// the regime where they are exact or where their neglected terms are below the tolerance.
OracleResult oracle_eq3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double gamma = GyromagneticRatio::from_cyclic_mhz_per_t(3500).angular();
  OracleResult r;
  for (; r.draws < 100; ++r.draws) {
    const double t2 = 1e-3 + 9e-3 * u(rng);
    bloch::BlochParams<double> p{gamma, t2 * (1.0 + 0.5 * u(rng)), t2, 0.2 + 0.8 * u(rng), Vector3d::UnitY()};
    const double by = (5e3 + 5e3 * u(rng)) / (gamma * t2);  // 1/(T2 gamma) <= 2e-4 By
    const double bxz = by * 3e-3 * (0.1 + 0.9 * u(rng));
    const double phi = -0.3 + 0.6 * u(rng);  // omega2 t + psi, frozen
    const double closed = bloch::nmr_modulated_px(bxz, by, 0.0, phi, 0.0, p, bloch::Form::Approximate);
    const Vector3d field(bxz * std::cos(phi), by, bxz * std::sin(phi));
    const auto ss = bloch::integrate_to_steady_state<double>(field, RotationRate{}, p);
    r.worst = std::max(r.worst, std::abs(ss.x() / closed - 1.0));
  }
  return r;
}

OracleResult oracle_eq6(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto sym = [&](double lo, double hi) { return (u(rng) < 0.5 ? -1.0 : 1.0) * (lo + (hi - lo) * u(rng)); };
  OracleResult r;
  while (r.draws < 100) {
    const double mhz = u(rng) < 0.5 ? -11.86 : 3.52;
    const double t = 1.0 + 29.0 * u(rng);  // isotropic: the rational form is exact for t1 = t2
    bloch::BlochParams<double> p{GyromagneticRatio::from_cyclic_mhz_per_t(mhz).angular(), t, t,
                                 0.005 + 0.095 * u(rng), Vector3d::UnitZ()};
    const double bz = sym(10e-9, 300e-9);
    const double b_az = sym(0.0, 5e-9);
    const double by = sym(0.0, 100e-9);
    const double bx = sym(0.0, 50e-9);
    const auto omega = RotationRate::from_rad_per_s(sym(0.0, 0.3));
    const double closed = bloch::serf_nuclear_pny(bx, by, bz, b_az, omega, p, bloch::Form::Full);
    if (std::abs(closed) < 1e-3 * p.p0) continue;  // nearly cancelling numerators carry no relative information
    ++r.draws;
    const auto ss = bloch::integrate_to_steady_state<double>(Vector3d(bx, by, bz - b_az), omega, p);
    r.worst = std::max(r.worst, std::abs(ss.y() / closed - 1.0));
  }
  return r;
}

OracleResult oracle_eq9(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double gamma = GyromagneticRatio::from_cyclic_mhz_per_t(3500).angular();
  OracleResult r;
  for (; r.draws < 100; ++r.draws) {
    const double t2 = 1e-3 + 9e-3 * u(rng);
    bloch::BlochParams<double> p{gamma, t2 * (1.0 + u(rng)), t2, 0.2 + 0.8 * u(rng), Vector3d::UnitZ()};
    const double tilt = (u(rng) < 0.5 ? -1.0 : 1.0) * 3e-4 * (0.05 + 0.95 * u(rng));  // gamma B T2
    const double b_ay = tilt / (gamma * t2);
    const double closed = bloch::serf_alkali_px(b_ay, p);
    const auto ss = bloch::integrate_to_steady_state<double>(Vector3d(0.0, b_ay, 0.0), RotationRate{}, p);
    r.worst = std::max(r.worst, std::abs(ss.x() / closed - 1.0));
  }
  return r;
}

void criterion_4() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  const auto e3 = oracle_eq3(rng);
  const auto e6 = oracle_eq6(rng);
  const auto e9 = oracle_eq9(rng);
  const double elapsed = seconds_since(start);
  const bool ok = e3.worst < 1e-4 && e6.worst < 1e-4 && e9.worst < 1e-6 && elapsed < 60.0;
  report(4, ok, "oracle equivalence",
         std::to_string(e3.draws) + "/" + std::to_string(e6.draws) + "/" + std::to_string(e9.draws) +
             " draws; worst rel. error modulated P_x " + fmt("%.2e", e3.worst) + ", nuclear P_ny " +
             fmt("%.2e", e6.worst) + ", linear alkali P_x " + fmt("%.2e", e9.worst) + "; runtime " +
             fmt("%.1f", elapsed) + " s");
}

void criterion_5() {
  // (a) servoed NMR output under slow ambient drift
  const auto cfg = nmr::default_config();
  nmr::ServoConfig servo;
  servo.setpoint = cfg.b1_setpoint;
  const auto one = RotationRate::from_deg_per_hour(1.0);
  auto omega = [&](double) { return one; };
  const double response = std::abs(nmr::compensated_output(cfg, one));
  const double baseline = nmr::run_closed_loop(cfg, servo, [](double) { return 0.0; }, omega, 40.0).back().output;
  double worst_a = 0.0;
  for (int i = -5; i <= 5; ++i) {
    const double offset = 10e-9 * i;
    auto ambient = [offset](double t) { return offset * std::min(t / 20.0, 1.0); };  // 2.5 nT/s at most, then hold
    const double settled = nmr::run_closed_loop(cfg, servo, ambient, omega, 40.0).back().output;
    worst_a = std::max(worst_a, std::abs(settled - baseline) / response);
  }

  // (b) SERF output on the compensation constraint
  const auto scfg = serf::default_config();
  const double s = serf::scale_factor(scfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_b = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto w = RotationRate::from_deg_per_hour((u(rng) < 0 ? -1.0 : 1.0) * (0.1 + 99.9 * std::abs(u(rng))));
    // residual field k P_ny up to 10x Omega/gamma_n
    const double pny = 10.0 * u(rng) * w.rad_per_s() / (scfg.nuclear.gamma.angular() * scfg.k);
    const double by = serf::compensation_field(scfg.k, pny, w, scfg.nuclear.gamma);
    const double out = serf::output_signal(scfg, by, pny, w);
    worst_b = std::max(worst_b, std::abs(out / (s * w.rad_per_s()) - 1.0));
  }

  // (c) NMR S * B_y over 500..5000 nT
  double worst_c = 0.0;
  const double ref = nmr::scale_factor(cfg) * cfg.b_y;
  for (int i = 0; i <= 90; ++i) {
    auto c = cfg;
    c.b_y = (500.0 + 50.0 * i) * 1e-9;
    worst_c = std::max(worst_c, std::abs(nmr::scale_factor(c) * c.b_y / ref - 1.0));
  }
  report(5, worst_a < 1e-6 && worst_b < 1e-12 && worst_c < 1e-12, "compensation invariants",
         "(a) settled output change / 1 deg/h response = " + fmt("%.2e", worst_a) + " over +-50 nT, (b) SERF " +
             fmt("%.2e", worst_b) + ", (c) S*B_y variation " + fmt("%.2e", worst_c));
}

void criterion_6() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_q = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto cfg = nmr::default_config();
    cfg.b_y = (1000.0 + 3000.0 * u(rng)) * 1e-9;
    cfg.b_xz = (5.0 + 30.0 * u(rng)) * 1e-9;
    const double phase = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.01 + 0.08 * u(rng));
    const auto w = RotationRate::from_deg_per_hour(10.0 * (u(rng) - 0.5));
    cfg.w2m = larmor_frequency(cfg.species2.gamma, cfg.b_y) + w.rad_per_s() + phase / cfg.species2.relaxation.t2;
    const double ts = 1.0 / (20.0 * std::abs(cfg.w2m) / kTwoPi);
    const auto samples = nmr::synthesize_presignal(cfg, w, ts, 2500.0 / std::abs(cfg.w2m));
    const auto out = nmr::lock_in_demodulate(samples, ts, nmr::LockInConfig{cfg.w2m, 0.0, 0.0});
    worst_q = std::max(worst_q, std::abs(out.quadrature / nmr::quadrature_output(cfg, w) - 1.0));
  }
  double worst_phase = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double omega = kTwoPi * (5.0 + 45.0 * u(rng)) * (u(rng) < 0.5 ? -1.0 : 1.0);
    const double psi = -3.1 + 6.2 * u(rng);
    const double ts = 1.0 / (20.0 * std::abs(omega) / kTwoPi);
    std::vector<double> s(static_cast<std::size_t>(std::llround(2500.0 / std::abs(omega) / ts)));
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = 0.7 * std::cos(omega * ts * static_cast<double>(k) + psi);
    const auto out = nmr::lock_in_demodulate(s, ts, nmr::LockInConfig{omega, 0.0, 0.0});
    worst_phase = std::max(worst_phase, std::abs(std::remainder(out.phase() - psi, kTwoPi)));
  }
  report(6, worst_q < 5e-3 && worst_phase < 1e-3, "demodulation",
         "worst quadrature rel. error " + fmt("%.2e", worst_q) + " over 20 configs, worst tone phase error " +
             fmt("%.2e", worst_phase) + " rad over 50 tones");
}

void criterion_7() {
  const auto n = analysis::sensitivity(nmr::default_config(), "b_y");
  const double rel = std::abs(n.finite_difference / *n.analytic - 1.0);
  auto scfg = serf::default_config();
  scfg.b_y = 1e-9;  // nonzero so the relative step is defined
  const auto s = analysis::sensitivity(scfg, "b_y");
  report(7, rel < 1e-6 && s.finite_difference == 0.0 && s.analytic && *s.analytic == 0.0, "sensitivity checks",
         "NMR dS/dB_y finite difference vs -S/B_y rel. diff " + fmt("%.2e", rel) + ", SERF dS/dB_y = " +
             fmt("%g", s.finite_difference));
}

void criterion_8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  bool linear = true;
  bool inverse = true;
  for (int i = 0; i < 200; ++i) {
    const double s = u(rng) * 1e3 * (i % 2 ? 1.0 : -1.0);
    const double noise = u(rng) * 1e-5;
    const double b = analysis::bias_stability_estimate(s, noise);
    const double k = u(rng);
    linear &= std::abs(analysis::bias_stability_estimate(s, k * noise) / (k * b) - 1.0) < 1e-14;
    inverse &= std::abs(analysis::implied_noise_floor(s, b) / noise - 1.0) < 1e-14;
  }
  linear &= analysis::bias_stability_estimate(1.0, 0.0) == 0.0;
  const double s_nmr = std::abs(nmr::scale_factor(nmr::default_config())) * kRadPerSecPerDegPerHour;
  const double s_serf = std::abs(serf::scale_factor(serf::default_config())) * kRadPerSecPerDegPerHour;
  const double floor_nmr = analysis::implied_noise_floor(s_nmr, analysis::kQuotedNmrBiasStability);
  const double floor_serf = analysis::implied_noise_floor(s_serf, analysis::kQuotedSerfBiasStability);
  report(8, linear && inverse, "bias stability (not reproduced; property-tested)",
         "linearity and inversion hold; implied noise floors " + fmt("%.3e", floor_nmr) + " mA (NMR, 0.003 deg/h), " +
             fmt("%.3e", floor_serf) + " mA (SERF, 0.002 deg/h)");
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, "exception", e.what());
  }
}

}  // namespace

int main() {
  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(8, criterion_8);
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
