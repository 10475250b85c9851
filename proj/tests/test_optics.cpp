#include <doctest.h>

#include "gyrocomp/optics.hpp"

using namespace gyrocomp;

TEST_SUITE("optics") {

TEST_CASE("lorentzian shape") {
  const double dn = 66.23e6;
  CHECK(lorentzian_d(0.0, dn) == 0.0);
  CHECK(lorentzian_d(dn / 2, dn) == doctest::Approx(1.0 / dn).epsilon(1e-14));
  CHECK(lorentzian_d(-1.234e7, dn) == -lorentzian_d(1.234e7, dn));
  double best = 0.0;
  for (int i = 0; i <= 200000; ++i) best = std::max(best, lorentzian_d(-5 * dn + i * 10 * dn / 200000, dn));
  CHECK(best <= 1.0 / dn * (1 + 1e-15));
  CHECK(lorentzian_d_slope(dn / 2, dn) == doctest::Approx(0.0).epsilon(1e-30));
  const double d = 1.0e7, h = 1.0;
  CHECK(lorentzian_d_slope(d, dn) ==
        doctest::Approx((lorentzian_d(d + h, dn) - lorentzian_d(d - h, dn)) / (2 * h)).epsilon(1e-6));
  CHECK_THROWS_AS(lorentzian_d(1.0, 0.0), ConfigError);
}

TEST_CASE("detection factor") {
  ProbeConfig p;
  p.n = 4.91e19;
  // [DERIVED] 0.6 * 4.91e19 * 0.01 * 3e8 * 2.82e-15 * 0.347 / 66.23e6 by hand
  CHECK(detection_factor_h(p) == doctest::Approx(1305.8034908651666).epsilon(1e-12));
  auto q = p;
  q.n *= 2;
  q.l /= 2;
  CHECK(detection_factor_h(q) == doctest::Approx(detection_factor_h(p)).epsilon(1e-14));
  q = p;
  q.i0 = 0.0;
  CHECK(detection_factor_h(q) == 0.0);
  q = p;
  q.detune = 0.0;
  CHECK(detection_factor_h(q) == 0.0);
  q = p;
  q.f = 1.5;
  CHECK_THROWS_AS(detection_factor_h(q), ConfigError);
  q = p;
  q.l = 0.0;
  CHECK_THROWS_AS(detection_factor_h(q), ConfigError);
}

TEST_CASE("presignal linearity") {
  ProbeConfig p;
  p.n = 4.91e19;
  const double h = detection_factor_h(p);
  CHECK(presignal(p, 0.0) == 0.0);
  CHECK(presignal(p, 1e-6) == doctest::Approx(h * 1e-6).epsilon(1e-15));
  CHECK(presignal(p, 1e-6) == doctest::Approx(1.306e-3).epsilon(1e-3));
  CHECK(presignal(p, -0.3) == -presignal(p, 0.3));
  auto q = p;
  q.i0 *= 3;
  CHECK(presignal(q, 0.2) == doctest::Approx(3 * presignal(p, 0.2)).epsilon(1e-15));
  CHECK_THROWS_AS(presignal(p, 1.01), PreconditionError);
}

}
