#include <doctest.h>

#include <random>

#include "gyrocomp/serf.hpp"

using namespace gyrocomp;
using namespace gyrocomp::serf;

TEST_SUITE("serf") {

TEST_CASE("compensation point") {
  CHECK(compensation_point(0.0, 0.0) == 0.0);
  CHECK(compensation_point(5e-9, 146e-9) == doctest::Approx(151e-9));
  // at the compensation point the approximate nuclear denominator is B_nz, so the compensation equation holds
  const auto cfg = default_config();
  const auto w = RotationRate::from_deg_per_hour(10.0);
  const double pny = steady_nuclear_pny(cfg, w);
  CHECK(cfg.k * pny == doctest::Approx(cfg.b_y + w.rad_per_s() / cfg.nuclear.gamma.angular()).epsilon(1e-12));
}

TEST_CASE("compensation field") {
  const auto g = GyromagneticRatio::from_cyclic_mhz_per_t(-11.86);
  CHECK(compensation_field(7e-6, 0.0, RotationRate{}, g) == 0.0);
  CHECK(compensation_field(7e-6, 0.01, RotationRate{}, g) == doctest::Approx(7e-8));
  const auto w = RotationRate::from_rad_per_s(0.01);
  CHECK(compensation_field(7e-6, 0.01, w, g) == doctest::Approx(7e-8 - 0.01 / g.angular()));
}

TEST_CASE("effective alkali field") {
  const auto ga = GyromagneticRatio::from_cyclic_mhz_per_t(3500);
  const auto gn = GyromagneticRatio::from_cyclic_mhz_per_t(-11.86);
  CHECK(effective_alkali_field(0.0, RotationRate{}, ga, 7e-6, 0.0) == 0.0);
  const auto w = RotationRate::from_rad_per_s(3e-5);
  const double k = 7.3e-6, p = 0.004;
  const double by = compensation_field(k, p, w, gn);
  CHECK(effective_alkali_field(by, w, ga, k, p) ==
        doctest::Approx((1 / ga.angular() - 1 / gn.angular()) * w.rad_per_s()).epsilon(1e-9));
  CHECK(effective_alkali_field(2e-9, RotationRate{}, ga, k, p) ==
        doctest::Approx(2 * effective_alkali_field(1e-9, RotationRate{}, ga, k, p / 2)).epsilon(1e-14));
}

TEST_CASE("output signal composed path against the closed form") {
  const auto cfg = default_config();
  CHECK(output_signal(cfg, cfg.k * 0.01, 0.01, RotationRate{}) == 0.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double pny = 0.01 * u(rng);
    const double by = cfg.k * pny + 1e-9 * u(rng);
    const auto w = RotationRate::from_rad_per_s(1e-3 * u(rng));
    const double composed = output_signal(cfg, by, pny, w);
    const double closed = output_signal_closed_form(cfg, by, pny, w);
    CHECK(std::abs(composed - closed) <= 1e-12 * std::max(std::abs(closed), 1e-300) + 1e-24);
  }
  // odd in the bracket
  const auto w = RotationRate::from_rad_per_s(2e-4);
  CHECK(output_signal_closed_form(cfg, 0.0, 0.0, w) == -output_signal_closed_form(cfg, 0.0, 0.0, -w));
  Warnings warn;
  output_signal(cfg, 1e-8, 0.0, RotationRate{}, &warn);
  CHECK(warn.size() == 1);
}

TEST_CASE("scale factor") {
  const auto cfg = default_config();
  const double s = scale_factor(cfg);
  // [QUOTED] about 6.24e-3 mA/(deg/h)
  CHECK(std::abs(s) * kRadPerSecPerDegPerHour == doctest::Approx(6.24e-3).epsilon(0.01));
  // [DERIVED] H T2a (gamma_a/gamma_n - 1) by hand
  CHECK(s == doctest::Approx(-1287.5810141602908).epsilon(1e-9));
  CHECK(enhancement_factor(cfg) == doctest::Approx(-296.1).epsilon(0.1 / 296.1));
  auto same = cfg;
  same.alkali.gamma = same.nuclear.gamma;
  CHECK(scale_factor(same) == 0.0);
  auto other = cfg;
  other.b_y = 3e-9;
  CHECK(scale_factor(other) == s);
}

TEST_CASE("self-compensation gives the scale-factor law") {
  const auto cfg = default_config();
  const double s = scale_factor(cfg);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // residual fields up to 10x the rotation-equivalent field; far beyond that B_y itself cannot be held in a
  // double finely enough (relative error ~ eps |k P_ny| / |Omega / gamma_n|)
  for (int i = 0; i < 100; ++i) {
    const auto w = RotationRate::from_deg_per_hour((u(rng) < 0 ? -1.0 : 1.0) * (0.1 + 99.9 * std::abs(u(rng))));
    const double pny = 10.0 * u(rng) * w.rad_per_s() / (cfg.nuclear.gamma.angular() * cfg.k);
    const double by = compensation_field(cfg.k, pny, w, cfg.nuclear.gamma);
    const double out = output_signal(cfg, by, pny, w);
    CHECK(std::abs(out - s * w.rad_per_s()) <= 1e-12 * std::abs(s * w.rad_per_s()));
  }
}

TEST_CASE("bias drift along the compensation constraint") {
  const auto cfg = default_config();
  const auto w = RotationRate::from_deg_per_hour(1.0);
  const double unit = w.rad_per_s() / (cfg.nuclear.gamma.angular() * cfg.k);  // P_ny whose field equals Omega/gamma_n
  const double pny = 2.0 * unit;
  const double by = compensation_field(cfg.k, pny, w, cfg.nuclear.gamma);
  const double base = output_signal(cfg, by, pny, w);
  for (double dp : {-3.0 * unit, 0.5 * unit, 5.0 * unit}) {
    const double moved = output_signal(cfg, by + cfg.k * dp, pny + dp, w);
    CHECK(std::abs(moved - base) <= 1e-12 * std::abs(base));
  }
  const double off = output_signal(cfg, by + 1e-15, pny, w);
  CHECK(std::abs(off - base) > 1e-3 * std::abs(base));

  // residual field drift absorbed by the nuclei at the compensation point
  for (double residual : {-2e-9, 0.0, 1e-10, 3e-9}) {
    auto c = cfg;
    c.b_y = residual;
    CHECK(self_compensated_output(c, w) == doctest::Approx(scale_factor(c) * w.rad_per_s()).epsilon(1e-9));
  }
}

TEST_CASE("config validation") {
  auto cfg = default_config();
  cfg.pnz = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.k = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.b_z = cfg.b_az;
  CHECK_THROWS_AS(steady_nuclear_pny(cfg, RotationRate{}), SingularConfigurationError);
}

}
