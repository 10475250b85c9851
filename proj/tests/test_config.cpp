#include <doctest.h>

#include <sstream>

#include "gyrocomp/config.hpp"

using namespace gyrocomp;

namespace {

Configuration parse(const std::string& text, std::vector<std::string> overrides = {}) {
  std::istringstream in(text);
  return parse_configuration(in, overrides);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults match the bundled parameter set") {
  const auto c = load_configuration(std::nullopt);
  CHECK(nmr::scale_factor(c.nmr) == doctest::Approx(nmr::scale_factor(nmr::default_config())).epsilon(1e-15));
  CHECK(serf::scale_factor(c.serf) == doctest::Approx(serf::scale_factor(serf::default_config())).epsilon(1e-15));
  CHECK(c.servo.setpoint == c.nmr.b1_setpoint);
  CHECK(c.nmr.w2m == doctest::Approx(larmor_frequency(c.xe129.gamma, c.nmr.b1_setpoint)));
  CHECK_FALSE(c.provenance.empty());
}

TEST_CASE("file values and derived quantities") {
  const auto c = parse(R"(; comment
[nmr]
b_y_t = 1e-6
[xe129]
polarization = 0.04
# another comment
[servo]
kp = 0.2
)");
  CHECK(c.nmr.b_y == 1e-6);
  CHECK(c.nmr.b1_setpoint == 1e-6);  // follows b_y unless given
  CHECK(c.servo.kp == 0.2);
  // B_n2 and the SERF compensation point are rederived from the new polarization
  CHECK(c.nmr.b_n2 == doctest::Approx(2 * 1.459900513224868e-7).epsilon(1e-9));
  CHECK(c.serf.b_z == doctest::Approx(c.serf.k * 0.04).epsilon(1e-12));
}

TEST_CASE("overrides win over the file") {
  const auto c = parse("[nmr]\nb_y_t = 1e-6\n", {"nmr.b_y_t=3e-6", "probe.detune_hz=1e7"});
  CHECK(c.nmr.b_y == 3e-6);
  CHECK(c.nmr.probe.detune == 1e7);
  CHECK(c.serf.probe.detune == 1e7);
}

TEST_CASE("provenance follows overridden keys") {
  const auto base = load_configuration(std::nullopt);
  const std::vector<std::string> o{"cs.density_per_m3=1e19"};
  const auto c = load_configuration(std::nullopt, o);
  auto has_density = [](const Configuration& cfg) {
    for (const auto& p : cfg.provenance)
      if (p.parameter == "cs.density_per_m3") return true;
    return false;
  };
  CHECK(has_density(base));
  CHECK_FALSE(has_density(c));
  CHECK(c.nmr.probe.n == 1e19);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(parse("[nmr]\nb_y_t = two\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nmr]\nunknown_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("b_y_t = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("", {"nmr.b_y_t"}), ConfigError);
  CHECK_THROWS_AS(parse("", {"nmr.nope=1"}), ConfigError);
  CHECK_THROWS_AS(parse("[xe129]\nt2_s = -1\n"), ConfigError);
  CHECK_THROWS_AS(load_configuration(std::filesystem::path("/nonexistent/gyro.ini")), ConfigError);
}

TEST_CASE("relaxation ordering warning surfaces") {
  const auto c = parse("[xe129]\nt1_s = 16.4\nt2_s = 60\n");
  CHECK_FALSE(c.warnings.empty());
}

TEST_CASE("snapshot round trips through the parser") {
  const auto c = parse("[nmr]\nb_y_t = 1.5e-6\n[probe]\nlinewidth_hz = 5e7\n");
  const auto snap = c.snapshot();
  std::ostringstream text;
  std::string section;
  text.precision(17);
  for (const auto& [key, value] : snap) {
    const auto dot = key.find('.');
    if (key.substr(0, dot) != section) {
      section = key.substr(0, dot);
      text << '[' << section << "]\n";
    }
    text << key.substr(dot + 1) << " = " << value << '\n';
  }
  const auto again = parse(text.str());
  CHECK(again.snapshot() == snap);
  for (const auto& key : configuration_keys()) CHECK(snap.count(key) == 1);
}

}
