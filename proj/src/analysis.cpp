#include "gyrocomp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace gyrocomp::analysis {
namespace {

template <typename Config>
struct Accessor {
  ParameterInfo info;
  std::function<double(const Config&)> get;
  std::function<void(Config&, double)> set;
};

template <typename Config>
void add_probe_parameters(std::vector<Accessor<Config>>& table) {
  table.push_back({{"i0", "mA", "probe photocurrent amplitude"},
                   [](const Config& c) { return c.probe.i0; },
                   [](Config& c, double v) { c.probe.i0 = v; }});
  table.push_back({{"alkali_density", "m^-3", "alkali vapour density"},
                   [](const Config& c) { return c.probe.n; },
                   [](Config& c, double v) {
                     c.probe.n = v;
                     c.alkali.density = v;
                   }});
  table.push_back({{"path_length", "m", "optical path length"},
                   [](const Config& c) { return c.probe.l; },
                   [](Config& c, double v) { c.probe.l = v; }});
  table.push_back({{"oscillator_strength", "1", "probe transition oscillator strength"},
                   [](const Config& c) { return c.probe.f; },
                   [](Config& c, double v) { c.probe.f = v; }});
  table.push_back({{"linewidth", "Hz", "absorption FWHM"},
                   [](const Config& c) { return c.probe.delta_nu; },
                   [](Config& c, double v) { c.probe.delta_nu = v; }});
  table.push_back({{"detune", "Hz", "probe detuning from line centre"},
                   [](const Config& c) { return c.probe.detune; },
                   [](Config& c, double v) { c.probe.detune = v; }});
}

void set_gamma(SpeciesParams& s, double v) { s.gamma = GyromagneticRatio::from_angular(v); }

const std::vector<Accessor<nmr::NmrConfig>>& nmr_table() {
  using C = nmr::NmrConfig;
  static const std::vector<Accessor<C>> table = [] {
    std::vector<Accessor<C>> t;
    t.push_back({{"b_y", "T", "total field along y"},
                 [](const C& c) { return c.b_y; },
                 [](C& c, double v) { c.b_y = v; }});
    t.push_back({{"b1_setpoint", "T", "stabilized equivalent field of species 1"},
                 [](const C& c) { return c.b1_setpoint; },
                 [](C& c, double v) { c.b1_setpoint = v; }});
    t.push_back({{"b_n2", "T", "species 2 magnetization"},
                 [](const C& c) { return c.b_n2; },
                 [](C& c, double v) { c.b_n2 = v; }});
    t.push_back({{"b_xz", "T", "transverse species 2 magnetization sensed by the alkali"},
                 [](const C& c) { return c.transverse_field(); },
                 [](C& c, double v) { c.b_xz = v; }});
    t.push_back({{"w2m", "rad/s", "applied modulation frequency"},
                 [](const C& c) { return c.w2m; },
                 [](C& c, double v) { c.w2m = v; }});
    t.push_back({{"psi", "rad", "precession phase"},
                 [](const C& c) { return c.psi; },
                 [](C& c, double v) { c.psi = v; }});
    t.push_back({{"p0", "1", "alkali polarization"},
                 [](const C& c) { return c.p0; },
                 [](C& c, double v) { c.p0 = v; }});
    t.push_back({{"t1n2", "s", "species 2 longitudinal relaxation"},
                 [](const C& c) { return c.species2.relaxation.t1; },
                 [](C& c, double v) { c.species2.relaxation.t1 = v; }});
    t.push_back({{"t2n2", "s", "species 2 transverse relaxation"},
                 [](const C& c) { return c.species2.relaxation.t2; },
                 [](C& c, double v) { c.species2.relaxation.t2 = v; }});
    t.push_back({{"gamma_n1", "rad/(s T)", "species 1 gyromagnetic ratio"},
                 [](const C& c) { return c.species1.gamma.angular(); },
                 [](C& c, double v) { set_gamma(c.species1, v); }});
    t.push_back({{"gamma_n2", "rad/(s T)", "species 2 gyromagnetic ratio"},
                 [](const C& c) { return c.species2.gamma.angular(); },
                 [](C& c, double v) { set_gamma(c.species2, v); }});
    add_probe_parameters(t);
    return t;
  }();
  return table;
}

const std::vector<Accessor<serf::SerfConfig>>& serf_table() {
  using C = serf::SerfConfig;
  static const std::vector<Accessor<C>> table = [] {
    std::vector<Accessor<C>> t;
    t.push_back({{"b_y", "T", "residual transverse field"},
                 [](const C& c) { return c.b_y; },
                 [](C& c, double v) { c.b_y = v; }});
    t.push_back({{"b_z", "T", "compensation coil field"},
                 [](const C& c) { return c.b_z; },
                 [](C& c, double v) { c.b_z = v; }});
    t.push_back({{"b_az", "T", "alkali magnetization field seen by the nuclei"},
                 [](const C& c) { return c.b_az; },
                 [](C& c, double v) { c.b_az = v; }});
    t.push_back({{"k", "T", "nuclear magnetization per unit polarization"},
                 [](const C& c) { return c.k; },
                 [](C& c, double v) { c.k = v; }});
    t.push_back({{"pnz", "1", "nuclear longitudinal polarization"},
                 [](const C& c) { return c.pnz; },
                 [](C& c, double v) { c.pnz = v; }});
    t.push_back({{"p0", "1", "alkali polarization"},
                 [](const C& c) { return c.p0; },
                 [](C& c, double v) { c.p0 = v; }});
    t.push_back({{"t2a", "s", "alkali transverse relaxation"},
                 [](const C& c) { return c.alkali.relaxation.t2; },
                 [](C& c, double v) { c.alkali.relaxation.t2 = v; }});
    t.push_back({{"t2n", "s", "nuclear transverse relaxation"},
                 [](const C& c) { return c.nuclear.relaxation.t2; },
                 [](C& c, double v) { c.nuclear.relaxation.t2 = v; }});
    t.push_back({{"gamma_a", "rad/(s T)", "alkali gyromagnetic ratio"},
                 [](const C& c) { return c.alkali.gamma.angular(); },
                 [](C& c, double v) { set_gamma(c.alkali, v); }});
    t.push_back({{"gamma_n", "rad/(s T)", "nuclear gyromagnetic ratio"},
                 [](const C& c) { return c.nuclear.gamma.angular(); },
                 [](C& c, double v) { set_gamma(c.nuclear, v); }});
    add_probe_parameters(t);
    return t;
  }();
  return table;
}

template <typename Config>
const Accessor<Config>& find(const std::vector<Accessor<Config>>& table, std::string_view id, Scheme scheme) {
  for (const auto& a : table) {
    if (a.info.id == id) return a;
  }
  std::ostringstream msg;
  msg << "unknown " << to_string(scheme) << " parameter '" << id << "'";
  throw ConfigError(msg.str());
}

std::vector<ParameterInfo> infos(const auto& table) {
  std::vector<ParameterInfo> out;
  for (const auto& a : table) out.push_back(a.info);
  return out;
}

// S is linear in these; dS/dp equals S evaluated at p = 1.
bool is_linear_parameter(std::string_view id) {
  return id == "i0" || id == "alkali_density" || id == "path_length" || id == "oscillator_strength" || id == "p0";
}

double per_deg_h(double per_rad_s) { return per_rad_s * kRadPerSecPerDegPerHour; }

std::optional<double> line_shape_sensitivity(const SchemeConfig& cfg, const ProbeConfig& probe, std::string_view id) {
  const double d = lorentzian_d(probe.detune, probe.delta_nu);
  if (d == 0.0) return std::nullopt;
  const double per_d = scale_factor(cfg) / d;
  if (id == "detune") return per_d * lorentzian_d_slope(probe.detune, probe.delta_nu);
  const double half = 0.5 * probe.delta_nu;
  const double denom = probe.detune * probe.detune + half * half;
  return per_d * (-probe.detune * half / (denom * denom));
}

}  // namespace

std::string_view to_string(Scheme scheme) { return scheme == Scheme::Nmr ? "nmr" : "serf"; }

std::string_view to_string(ErrorSource::Kind kind) { return kind == ErrorSource::Kind::Bias ? "bias" : "scale"; }

Scheme scheme_of(const SchemeConfig& cfg) {
  return std::holds_alternative<nmr::NmrConfig>(cfg) ? Scheme::Nmr : Scheme::Serf;
}

double enhancement_factor(GyromagneticRatio gamma_num, GyromagneticRatio gamma_den) {
  if (gamma_den.angular() == 0.0) throw SingularConfigurationError("enhancement factor with zero denominator ratio");
  return gamma_num.angular() / gamma_den.angular() - 1.0;
}

double enhancement_factor(const SchemeConfig& cfg) {
  return std::visit(
      [](const auto& c) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, nmr::NmrConfig>) {
          return enhancement_factor(c.species2.gamma, c.species1.gamma);
        } else {
          return enhancement_factor(c.alkali.gamma, c.nuclear.gamma);
        }
      },
      cfg);
}

double scale_factor(const SchemeConfig& cfg) {
  return std::visit(
      [](const auto& c) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, nmr::NmrConfig>) {
          return nmr::scale_factor(c);
        } else {
          return serf::scale_factor(c);
        }
      },
      cfg);
}

double compensated_output(const SchemeConfig& cfg, RotationRate omega_y) {
  return std::visit(
      [omega_y](const auto& c) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, nmr::NmrConfig>) {
          return nmr::compensated_output(c, omega_y);
        } else {
          return serf::self_compensated_output(c, omega_y);
        }
      },
      cfg);
}

const std::vector<ParameterInfo>& parameters(Scheme scheme) {
  static const std::vector<ParameterInfo> nmr_infos = infos(nmr_table());
  static const std::vector<ParameterInfo> serf_infos = infos(serf_table());
  return scheme == Scheme::Nmr ? nmr_infos : serf_infos;
}

const ParameterInfo& parameter_info(Scheme scheme, std::string_view id) {
  return scheme == Scheme::Nmr ? find(nmr_table(), id, scheme).info : find(serf_table(), id, scheme).info;
}

double get_parameter(const SchemeConfig& cfg, std::string_view id) {
  if (const auto* c = std::get_if<nmr::NmrConfig>(&cfg)) return find(nmr_table(), id, Scheme::Nmr).get(*c);
  return find(serf_table(), id, Scheme::Serf).get(std::get<serf::SerfConfig>(cfg));
}

SchemeConfig with_parameter(SchemeConfig cfg, std::string_view id, double value) {
  if (auto* c = std::get_if<nmr::NmrConfig>(&cfg)) {
    find(nmr_table(), id, Scheme::Nmr).set(*c, value);
  } else {
    find(serf_table(), id, Scheme::Serf).set(std::get<serf::SerfConfig>(cfg), value);
  }
  return cfg;
}

std::optional<double> analytic_sensitivity(const SchemeConfig& cfg, std::string_view id) {
  const Scheme scheme = scheme_of(cfg);
  parameter_info(scheme, id);
  if (is_linear_parameter(id)) return scale_factor(with_parameter(cfg, id, 1.0));

  if (const auto* c = std::get_if<nmr::NmrConfig>(&cfg)) {
    if (id == "detune" || id == "linewidth") return line_shape_sensitivity(cfg, c->probe, id);
    const double s = nmr::scale_factor(*c);
    const bool derived_drive = !c->b_xz.has_value();
    const auto& relax = c->species2.relaxation;
    const double g1 = c->species1.gamma.angular();
    const double g2 = c->species2.gamma.angular();
    const double per_enh = detection_factor_h(c->probe) * c->p0 * c->transverse_field() / c->b_y * relax.t2;
    if (id == "b_y") return -s / c->b_y;
    if (id == "b_n2") {
      if (!derived_drive) return 0.0;
      return detection_factor_h(c->probe) * c->p0 * 0.5 * std::sqrt(relax.t2 / relax.t1) / c->b_y * relax.t2 *
             nmr::enhancement_factor(*c);
    }
    if (id == "b_xz") return detection_factor_h(c->probe) * c->p0 / c->b_y * relax.t2 * nmr::enhancement_factor(*c);
    if (id == "t2n2") return (derived_drive ? 1.5 : 1.0) * s / relax.t2;
    if (id == "t1n2") return derived_drive ? -0.5 * s / relax.t1 : 0.0;
    if (id == "gamma_n2") return per_enh / g1;
    if (id == "gamma_n1") return per_enh * (-g2 / (g1 * g1));
    if (id == "w2m" || id == "psi" || id == "b1_setpoint") return 0.0;
    return std::nullopt;
  }

  const auto& c = std::get<serf::SerfConfig>(cfg);
  if (id == "detune" || id == "linewidth") return line_shape_sensitivity(cfg, c.probe, id);
  const double ga = c.alkali.gamma.angular();
  const double gn = c.nuclear.gamma.angular();
  const double per_enh = detection_factor_h(c.probe) * c.p0 * c.alkali.relaxation.t2;
  if (id == "t2a") return serf::scale_factor(c) / c.alkali.relaxation.t2;
  if (id == "gamma_a") return per_enh / gn;
  if (id == "gamma_n") return per_enh * (-ga / (gn * gn));
  if (id == "b_y" || id == "b_z" || id == "b_az" || id == "k" || id == "pnz" || id == "t2n") return 0.0;
  return std::nullopt;
}

Sensitivity sensitivity(const SchemeConfig& cfg, std::string_view id, double relative_step) {
  const Scheme scheme = scheme_of(cfg);
  const ParameterInfo& info = parameter_info(scheme, id);
  const double p = get_parameter(cfg, id);
  const double h = relative_step * std::abs(p);
  if (!(h > 0.0) || p + h == p || p - h == p) {
    std::ostringstream msg;
    msg << "finite-difference step for '" << id << "' collapses at value " << p;
    throw PreconditionError(msg.str());
  }
  const double up = scale_factor(with_parameter(cfg, id, p + h));
  const double down = scale_factor(with_parameter(cfg, id, p - h));
  Sensitivity out;
  out.parameter = info.id;
  out.unit = info.unit;
  out.value = p;
  out.step = h;
  out.finite_difference = (up - down) / (2.0 * h);
  out.analytic = analytic_sensitivity(cfg, id);
  return out;
}

ErrorBudget error_budget(const SchemeConfig& cfg, std::span<const ErrorSource> sources, RotationRate applied) {
  const double s = scale_factor(cfg);
  if (s == 0.0) throw SingularConfigurationError("error budget needs a nonzero scale factor");
  const Scheme scheme = scheme_of(cfg);
  ErrorBudget budget;
  budget.applied_rate = applied.rad_per_s();
  for (const auto& src : sources) {
    parameter_info(scheme, src.parameter);
    if (!(src.magnitude >= 0.0)) throw ConfigError("error source '" + src.name + "' has negative magnitude");
    double rate = 0.0;
    if (src.magnitude > 0.0) {
      if (src.kind == ErrorSource::Kind::Scale) {
        const double ds = sensitivity(cfg, src.parameter).finite_difference;
        rate = std::abs(ds) * src.magnitude * std::abs(applied.rad_per_s()) / std::abs(s);
      } else {
        const double p = get_parameter(cfg, src.parameter);
        const double h = p != 0.0 ? 1e-4 * std::abs(p) : src.magnitude;
        const RotationRate zero;
        const double up = compensated_output(with_parameter(cfg, src.parameter, p + h), zero);
        const double down = compensated_output(with_parameter(cfg, src.parameter, p - h), zero);
        rate = std::abs((up - down) / (2.0 * h)) * src.magnitude / std::abs(s);
      }
    }
    budget.contributions.push_back({src.name, src.parameter, src.kind, rate});
  }
  std::sort(budget.contributions.begin(), budget.contributions.end(), [](const Contribution& a, const Contribution& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    if (a.name != b.name) return a.name < b.name;
    return a.parameter < b.parameter;
  });
  double sum_sq = 0.0;
  for (const auto& c : budget.contributions) sum_sq += c.rate * c.rate;
  budget.rss_total = std::sqrt(sum_sq);
  return budget;
}

double bias_stability_estimate(double scale_factor, double noise_floor) {
  if (scale_factor == 0.0) throw SingularConfigurationError("bias stability needs a nonzero scale factor");
  if (!(noise_floor >= 0.0)) throw ConfigError("noise floor must be >= 0");
  return noise_floor / std::abs(scale_factor);
}

double implied_noise_floor(double scale_factor, double bias_stability) {
  return std::abs(scale_factor) * bias_stability;
}

std::vector<SweepRow> sweep(const SchemeConfig& cfg, std::string_view id, std::span<const double> grid) {
  parameter_info(scheme_of(cfg), id);
  std::vector<SweepRow> rows(grid.size());
  auto evaluate = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = grid[i];
    try {
      const SchemeConfig point = with_parameter(cfg, id, grid[i]);
      row.scale_factor = scale_factor(point);
      row.enhancement_factor = enhancement_factor(point);
    } catch (const Error& e) {
      row.scale_factor.reset();
      row.error = e.what();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(grid.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
    return rows;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) evaluate(i);
    });
  }
  pool.clear();
  return rows;
}

std::optional<Discrepancy> scale_factor_discrepancy(const SchemeConfig& cfg) {
  const Scheme scheme = scheme_of(cfg);
  const double quoted = scheme == Scheme::Nmr ? kQuotedNmrScaleFactor : kQuotedSerfScaleFactor;
  const double computed = std::abs(per_deg_h(scale_factor(cfg)));
  if (std::abs(computed - quoted) <= 0.05 * quoted) return std::nullopt;

  Discrepancy d;
  d.quantity = std::string(to_string(scheme)) + ".scale_factor";
  d.computed = computed;
  d.quoted = quoted;
  d.ratio = computed / quoted;
  auto candidate = [&](std::string cause, const SchemeConfig& alt) {
    try {
      d.candidates.push_back({std::move(cause), std::abs(per_deg_h(scale_factor(alt)))});
    } catch (const Error&) {
    }
  };
  if (const auto* c = std::get_if<nmr::NmrConfig>(&cfg)) {
    nmr::NmrConfig swapped = *c;
    std::swap(swapped.species2.relaxation.t1, swapped.species2.relaxation.t2);
    candidate("T1/T2 label swap: transverse and longitudinal 129Xe times exchanged as printed in the table", swapped);
    nmr::NmrConfig flipped = *c;
    flipped.species1.gamma = -c->species1.gamma;
    candidate("gamma sign convention: gamma_n1 taken with the opposite sign (|gamma_n2/gamma_n1| + 1)", flipped);
    nmr::NmrConfig half = *c;
    half.b_n2 = 0.5 * c->b_n2;
    candidate("B_n2 prefactor convention: 4 pi / 3 instead of 8 pi / 3", half);
    nmr::NmrConfig no_half = *c;
    no_half.b_xz = 2.0 * c->transverse_field();
    candidate("optimal-drive factor 1/2 omitted", no_half);
  } else {
    const auto& s = std::get<serf::SerfConfig>(cfg);
    serf::SerfConfig printed = s;
    printed.probe.n = 4.91e9;
    candidate("alkali density read as the printed 4.91e9 m^-3", printed);
    serf::SerfConfig half_linewidth = s;
    half_linewidth.probe.detune = 0.5 * s.probe.delta_nu;
    candidate("detection factor evaluated at half-linewidth detune instead of the configured detune", half_linewidth);
  }
  return d;
}

ScaleFactorReport make_scale_factor_report(const SchemeConfig& cfg, std::vector<Provenance> provenance) {
  ScaleFactorReport r;
  r.scheme = scheme_of(cfg);
  r.scale_factor = scale_factor(cfg);
  r.scale_factor_per_deg_h = per_deg_h(r.scale_factor);
  r.enhancement_factor = enhancement_factor(cfg);
  for (const auto& info : parameters(r.scheme)) {
    try {
      r.sensitivities.push_back(sensitivity(cfg, info.id));
    } catch (const Error& e) {
      r.unavailable_sensitivities.emplace_back(info.id, e.what());
    }
  }
  if (auto d = scale_factor_discrepancy(cfg)) r.discrepancies.push_back(std::move(*d));
  r.provenance = std::move(provenance);
  const double quoted_stability =
      r.scheme == Scheme::Nmr ? kQuotedNmrBiasStability : kQuotedSerfBiasStability;
  r.implied_noise_floor_ma = implied_noise_floor(r.scale_factor_per_deg_h, quoted_stability);
  return r;
}

ComparisonReport compare(const nmr::NmrConfig& nmr_cfg, const serf::SerfConfig& serf_cfg) {
  ComparisonReport r;
  r.nmr.compensation_equation = "B_y = B_1 - Omega_y/gamma_n1";
  r.nmr.output_signal = "1/2 * (B_n2/B_y) * sqrt(T_2n2/T_1n2) * H * T_2n2 * (gamma_n2/gamma_n1 - 1) * Omega_y";
  r.nmr.enhancement_expression = "gamma_n2/gamma_n1 - 1";
  r.nmr.scale_factor = nmr::scale_factor(nmr_cfg);
  r.nmr.scale_factor_per_deg_h = per_deg_h(r.nmr.scale_factor);
  r.nmr.enhancement_factor = nmr::enhancement_factor(nmr_cfg);

  r.serf.compensation_equation = "B_y = k*P_ny - Omega_y/gamma_n";
  r.serf.output_signal = "H * T_2a * (gamma_a/gamma_n - 1) * Omega_y";
  r.serf.enhancement_expression = "gamma_a/gamma_n - 1";
  r.serf.scale_factor = serf::scale_factor(serf_cfg);
  r.serf.scale_factor_per_deg_h = per_deg_h(r.serf.scale_factor);
  r.serf.enhancement_factor = serf::enhancement_factor(serf_cfg);

  r.scale_factor_ratio = r.nmr.scale_factor != 0.0 ? std::abs(r.serf.scale_factor / r.nmr.scale_factor) : 0.0;
  r.enhancement_ratio =
      r.nmr.enhancement_factor != 0.0 ? std::abs(r.serf.enhancement_factor / r.nmr.enhancement_factor) : 0.0;
  const auto& relax = nmr_cfg.species2.relaxation;
  r.nmr_prefactor = 0.5 * nmr_cfg.b_n2 / nmr_cfg.b_y * std::sqrt(relax.t2 / relax.t1);
  r.relaxation_ratio = relax.t2 / serf_cfg.alkali.relaxation.t2;

  std::ostringstream extra;
  extra << "NMR output carries the extra prefactor 1/2 * (B_n2/B_y) * sqrt(T_2n2/T_1n2) = " << r.nmr_prefactor
        << "; B_y no longer biases the output but scales it inversely";
  r.differences.push_back(extra.str());
  std::ostringstream gain;
  gain << "SERF enhancement |gamma_a/gamma_n - 1| exceeds NMR |gamma_n2/gamma_n1 - 1| by " << r.enhancement_ratio
       << "x, offset by the longer nuclear coherence T_2n2/T_2a = " << r.relaxation_ratio;
  r.differences.push_back(gain.str());

  for (const SchemeConfig& c : {SchemeConfig(nmr_cfg), SchemeConfig(serf_cfg)}) {
    if (auto d = scale_factor_discrepancy(c)) r.discrepancies.push_back(std::move(*d));
  }
  return r;
}

}  // namespace gyrocomp::analysis
