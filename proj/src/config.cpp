#include "gyrocomp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <fstream>
#include <set>
#include <sstream>

namespace gyrocomp {
namespace {

namespace pt = boost::property_tree;

const std::vector<std::string> kSpeciesKeys = {"gamma_cyclic_mhz_per_t", "t1_s", "t2_s",
                                               "magnetic_moment_j_per_t", "density_per_m3", "polarization"};

std::vector<std::string> build_keys() {
  std::vector<std::string> keys;
  for (const char* species : {"cs", "xe129", "xe131"}) {
    for (const auto& k : kSpeciesKeys) keys.push_back(std::string(species) + "." + k);
  }
  for (const char* k : {"magnetization.kappa0", "probe.optical_power_mw", "probe.responsivity_ma_per_mw",
                        "probe.i0_ma", "probe.path_length_m", "probe.oscillator_strength", "probe.line_center_hz",
                        "probe.linewidth_hz", "probe.detune_hz", "probe.speed_of_light_m_per_s",
                        "probe.electron_radius_m", "nmr.b_y_t", "nmr.b1_setpoint_t", "nmr.b_n2_t", "nmr.b_xz_t",
                        "nmr.w2m_rad_per_s", "nmr.psi_rad", "nmr.p0", "serf.b_y_t", "serf.b_z_t", "serf.b_az_t",
                        "serf.k_t", "serf.pnz", "serf.p0", "servo.kp", "servo.ki_per_s", "servo.sample_period_s",
                        "servo.setpoint_t", "servo.frequency_noise_rad_per_s", "servo.seed"}) {
    keys.emplace_back(k);
  }
  return keys;
}

double parse_number(const std::string& key, const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t"));
  trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
  double value = 0.0;
  const char* first = trimmed.data();
  const char* last = first + trimmed.size();
  if (!trimmed.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || trimmed.empty()) {
    throw ConfigError("config value for '" + key + "' is not a number: '" + text + "'");
  }
  return value;
}

/// Flat `section.key` -> value view over the parsed file plus overrides.
class Values {
 public:
  Values(const pt::ptree& tree, std::span<const std::string> overrides) {
    const auto& known = configuration_keys();
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("config key '" + section + "' must appear inside a [section]");
      }
      for (const auto& [key, leaf] : body) {
        store(allowed, section + "." + key, leaf.data());
      }
    }
    for (const auto& entry : overrides) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ConfigError("override '" + entry + "' must look like section.key=value");
      store(allowed, entry.substr(0, eq), entry.substr(eq + 1));
    }
  }

  std::optional<double> find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  double get(const std::string& key, double fallback) const { return find(key).value_or(fallback); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

 private:
  void store(const std::set<std::string>& allowed, const std::string& key, const std::string& text) {
    if (allowed.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = parse_number(key, text);
  }

  std::map<std::string, double> values_;
};

void apply_species(const Values& v, const std::string& section, SpeciesParams& s, Warnings& warnings) {
  s.gamma = GyromagneticRatio::from_cyclic_mhz_per_t(
      v.get(section + ".gamma_cyclic_mhz_per_t", s.gamma.cyclic_mhz_per_t()));
  s.relaxation = RelaxationPair(v.get(section + ".t1_s", s.relaxation.t1), v.get(section + ".t2_s", s.relaxation.t2),
                                &warnings);
  s.magnetic_moment = v.get(section + ".magnetic_moment_j_per_t", s.magnetic_moment);
  s.density = v.get(section + ".density_per_m3", s.density);
  s.polarization = v.get(section + ".polarization", s.polarization);
  s.validate();
}

Configuration resolve(const Values& v) {
  const Table2Defaults d = load_table2_defaults();
  Configuration c;
  c.cs = d.cs;
  c.xe129 = d.xe129;
  c.xe131 = d.xe131;
  apply_species(v, "cs", c.cs, c.warnings);
  apply_species(v, "xe129", c.xe129, c.warnings);
  apply_species(v, "xe131", c.xe131, c.warnings);

  // Keep annotations only for defaults that survived the overrides.
  for (const auto& p : d.provenance) {
    const bool overridden = (p.parameter == "cs.density_per_m3" && v.has("cs.density_per_m3")) ||
                            (p.parameter == "cs.t1_s" && v.has("cs.t1_s")) ||
                            (p.parameter == "cs.polarization" && v.has("cs.polarization")) ||
                            (p.parameter == "xe129.t1_s/xe129.t2_s" && (v.has("xe129.t1_s") || v.has("xe129.t2_s"))) ||
                            (p.parameter == "xe131.t1_s/xe131.t2_s" && (v.has("xe131.t1_s") || v.has("xe131.t2_s")));
    if (!overridden) c.provenance.push_back(p);
  }

  c.kappa0 = v.get("magnetization.kappa0", d.kappa0);
  MagnetizationParams mag;
  mag.kappa0 = c.kappa0;
  mag.moment = c.xe129.magnetic_moment;
  mag.density = c.xe129.density;
  mag.polarization = c.xe129.polarization;
  mag.validate();
  const double k = magnetization_ratio(mag);

  ProbeConfig probe = d.probe;
  c.optical_power_mw = v.get("probe.optical_power_mw", d.optical_power_mw);
  c.responsivity_ma_per_mw = v.get("probe.responsivity_ma_per_mw", d.responsivity_ma_per_mw);
  probe.i0 = v.get("probe.i0_ma", photocurrent_ma(c.optical_power_mw, c.responsivity_ma_per_mw));
  probe.n = c.cs.density;
  probe.l = v.get("probe.path_length_m", probe.l);
  probe.f = v.get("probe.oscillator_strength", probe.f);
  probe.nu0 = v.get("probe.line_center_hz", probe.nu0);
  probe.delta_nu = v.get("probe.linewidth_hz", probe.delta_nu);
  probe.detune = v.get("probe.detune_hz", probe.delta_nu / 2.0);
  probe.c = v.get("probe.speed_of_light_m_per_s", probe.c);
  probe.r_e = v.get("probe.electron_radius_m", probe.r_e);
  probe.validate();

  auto& n = c.nmr;
  n.species1 = c.xe131;
  n.species2 = c.xe129;
  n.alkali = c.cs;
  n.probe = probe;
  n.b_y = v.get("nmr.b_y_t", d.b_y);
  n.b1_setpoint = v.get("nmr.b1_setpoint_t", n.b_y);
  n.b_n2 = v.get("nmr.b_n2_t", k * c.xe129.polarization);
  if (auto bxz = v.find("nmr.b_xz_t")) n.b_xz = *bxz;
  n.w2m = v.get("nmr.w2m_rad_per_s", larmor_frequency(n.species2.gamma, n.b1_setpoint));
  n.psi = v.get("nmr.psi_rad", 0.0);
  n.p0 = v.get("nmr.p0", c.cs.polarization);
  if (!(std::abs(n.psi) < std::numbers::pi)) throw ConfigError("nmr.psi_rad must satisfy |psi| < pi");
  if (!(n.p0 >= 0.0 && n.p0 <= 1.0)) throw ConfigError("nmr.p0 must lie in [0, 1]");

  auto& s = c.serf;
  s.nuclear = c.xe129;
  s.alkali = c.cs;
  s.probe = probe;
  s.k = v.get("serf.k_t", k);
  s.pnz = v.get("serf.pnz", c.xe129.polarization);
  s.b_az = v.get("serf.b_az_t", 0.0);
  s.b_z = v.get("serf.b_z_t", serf::compensation_point(s.b_az, s.k * s.pnz));
  s.b_y = v.get("serf.b_y_t", 0.0);
  s.p0 = v.get("serf.p0", c.cs.polarization);
  s.validate();

  auto& sv = c.servo;
  sv.kp = v.get("servo.kp", sv.kp);
  sv.ki = v.get("servo.ki_per_s", sv.ki);
  sv.sample_period = v.get("servo.sample_period_s", sv.sample_period);
  sv.setpoint = v.get("servo.setpoint_t", n.b1_setpoint);
  sv.frequency_noise = v.get("servo.frequency_noise_rad_per_s", 0.0);
  const double seed = v.get("servo.seed", 1.0);
  if (!(seed >= 0.0) || seed != std::floor(seed)) throw ConfigError("servo.seed must be a non-negative integer");
  sv.seed = static_cast<std::uint64_t>(seed);
  sv.validate();
  return c;
}

}  // namespace

const std::vector<std::string>& configuration_keys() {
  static const std::vector<std::string> keys = build_keys();
  return keys;
}

Configuration parse_configuration(std::istream& in, std::span<const std::string> overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return resolve(Values(tree, overrides));
}

Configuration load_configuration(const std::optional<std::filesystem::path>& path,
                                 std::span<const std::string> overrides) {
  if (!path) {
    std::istringstream empty;
    return parse_configuration(empty, overrides);
  }
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config file '" + path->string() + "'");
  return parse_configuration(in, overrides);
}

std::map<std::string, double> Configuration::snapshot() const {
  std::map<std::string, double> out;
  auto species = [&](const std::string& section, const SpeciesParams& s) {
    out[section + ".gamma_cyclic_mhz_per_t"] = s.gamma.cyclic_mhz_per_t();
    out[section + ".t1_s"] = s.relaxation.t1;
    out[section + ".t2_s"] = s.relaxation.t2;
    out[section + ".magnetic_moment_j_per_t"] = s.magnetic_moment;
    out[section + ".density_per_m3"] = s.density;
    out[section + ".polarization"] = s.polarization;
  };
  species("cs", cs);
  species("xe129", xe129);
  species("xe131", xe131);
  out["magnetization.kappa0"] = kappa0;
  const ProbeConfig& p = nmr.probe;
  out["probe.optical_power_mw"] = optical_power_mw;
  out["probe.responsivity_ma_per_mw"] = responsivity_ma_per_mw;
  out["probe.i0_ma"] = p.i0;
  out["probe.path_length_m"] = p.l;
  out["probe.oscillator_strength"] = p.f;
  out["probe.line_center_hz"] = p.nu0;
  out["probe.linewidth_hz"] = p.delta_nu;
  out["probe.detune_hz"] = p.detune;
  out["probe.speed_of_light_m_per_s"] = p.c;
  out["probe.electron_radius_m"] = p.r_e;
  out["nmr.b_y_t"] = nmr.b_y;
  out["nmr.b1_setpoint_t"] = nmr.b1_setpoint;
  out["nmr.b_n2_t"] = nmr.b_n2;
  out["nmr.b_xz_t"] = nmr.transverse_field();
  out["nmr.w2m_rad_per_s"] = nmr.w2m;
  out["nmr.psi_rad"] = nmr.psi;
  out["nmr.p0"] = nmr.p0;
  out["serf.b_y_t"] = serf.b_y;
  out["serf.b_z_t"] = serf.b_z;
  out["serf.b_az_t"] = serf.b_az;
  out["serf.k_t"] = serf.k;
  out["serf.pnz"] = serf.pnz;
  out["serf.p0"] = serf.p0;
  out["servo.kp"] = servo.kp;
  out["servo.ki_per_s"] = servo.ki;
  out["servo.sample_period_s"] = servo.sample_period;
  out["servo.setpoint_t"] = servo.setpoint;
  out["servo.frequency_noise_rad_per_s"] = servo.frequency_noise;
  out["servo.seed"] = static_cast<double>(servo.seed);
  return out;
}

}  // namespace gyrocomp
