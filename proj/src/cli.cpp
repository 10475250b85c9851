#include "gyrocomp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "gyrocomp/analysis.hpp"
#include "gyrocomp/bloch.hpp"
#include "gyrocomp/config.hpp"
#include "gyrocomp/report.hpp"

namespace gyrocomp::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::string format = "json";
  std::string plot_path;
};

void add_common(CLI::App* cmd, Common& c, bool with_format) {
  cmd->add_option("--config", c.config_path, "key-value configuration file (defaults: Cs-Xe parameter set)");
  cmd->add_option("--out", c.out_path, "output file (default: standard output)");
  cmd->add_option("--set", c.overrides, "override a config value, section.key=value")->take_all();
  if (with_format) cmd->add_option("--format", c.format, "json or text")->check(CLI::IsMember({"json", "text"}));
}

Configuration load(const Common& c) {
  std::optional<std::filesystem::path> path;
  if (!c.config_path.empty()) path = c.config_path;
  return load_configuration(path, c.overrides);
}

analysis::SchemeConfig scheme_config(const Configuration& cfg, const std::string& model) {
  if (model == "nmr") return cfg.nmr;
  return cfg.serf;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// Writes text to --out (creating a sidecar manifest for CSV files) or to `out`.
class Emitter {
 public:
  Emitter(const Common& c, std::ostream& out) : common_(c), out_(out) {}

  void json_document(const report::RunManifest& manifest, const json& body) {
    json doc = {{"manifest", report::to_json(manifest)}, {"report", body}};
    write(common_.out_path, doc.dump(2) + "\n");
  }

  void text_document(const std::string& body) { write(common_.out_path, body); }

  void csv_document(const report::RunManifest& manifest, const std::string& csv) {
    write(common_.out_path, csv);
    if (!common_.out_path.empty()) write_manifest(common_.out_path, manifest);
  }

  void plot(const report::RunManifest& manifest, const std::string& data) {
    if (common_.plot_path.empty()) return;
    write(common_.plot_path, data);
    write_manifest(common_.plot_path, manifest);
  }

 private:
  void write(const std::string& path, const std::string& text) {
    if (path.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file '" + path + "'");
    f << text;
  }

  void write_manifest(const std::string& path, const report::RunManifest& manifest) {
    json doc = {{"output", std::filesystem::path(path).filename().string()}, {"manifest", report::to_json(manifest)}};
    write(path + ".manifest.json", doc.dump(2) + "\n");
  }

  const Common& common_;
  std::ostream& out_;
};

int cmd_scale_factor(const Common& c, const std::string& model, std::ostream& out) {
  const Configuration cfg = load(c);
  const auto rep = analysis::make_scale_factor_report(scheme_config(cfg, model), cfg.provenance);
  Emitter emit(c, out);
  if (c.format == "text") {
    emit.text_document(report::to_text(rep));
  } else {
    emit.json_document(report::make_manifest("scale-factor --model " + model, c.config_path, cfg), report::to_json(rep));
  }
  return kOk;
}

int cmd_compare(const Common& c, std::ostream& out) {
  const Configuration cfg = load(c);
  const auto rep = analysis::compare(cfg.nmr, cfg.serf);
  Emitter emit(c, out);
  if (c.format == "text") {
    emit.text_document(report::to_text(rep));
  } else {
    json body = report::to_json(rep);
    json prov = json::array();
    for (const auto& p : cfg.provenance) prov.push_back(report::to_json(p));
    body["provenance"] = prov;
    emit.json_document(report::make_manifest("compare", c.config_path, cfg), body);
  }
  return kOk;
}

int cmd_simulate(const Common& c, const std::string& disturbance_path, double duration, std::ostream& out) {
  if (!(duration > 0.0)) throw ConfigError("--duration must be > 0");
  const Configuration cfg = load(c);
  DisturbanceTable table{{0.0}, {0.0}, {0.0}};
  if (!disturbance_path.empty()) {
    std::ifstream in(disturbance_path);
    if (!in) throw ConfigError("cannot open disturbance file '" + disturbance_path + "'");
    table = read_disturbance_csv(in);
  }
  const auto samples = nmr::run_closed_loop(
      cfg.nmr, cfg.servo, [&](double t) { return table.ambient_at(t); }, [&](double t) { return table.omega_at(t); },
      duration);
  std::ostringstream csv;
  report::write_loop_csv(csv, samples);
  const auto manifest = report::make_manifest("simulate --model nmr --closed-loop", c.config_path, cfg);
  Emitter emit(c, out);
  emit.csv_document(manifest, csv.str());
  if (!c.plot_path.empty()) {
    std::vector<double> t, coil;
    for (const auto& s : samples) {
      t.push_back(s.t);
      coil.push_back(s.coil_field);
    }
    std::ostringstream plot;
    report::write_plot_data(plot, "t_s", "coil_field_t", t, coil);
    emit.plot(manifest, plot.str());
  }
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& model, const std::string& param, const std::string& grid_spec,
              std::ostream& out) {
  const Configuration cfg = load(c);
  const auto sc = scheme_config(cfg, model);
  const auto& info = analysis::parameter_info(analysis::scheme_of(sc), param);
  const auto grid = parse_grid(grid_spec);
  const auto rows = analysis::sweep(sc, param, grid);
  std::ostringstream csv;
  report::write_sweep_csv(csv, info, rows);
  const auto manifest = report::make_manifest("sweep --model " + model + " --param " + param + " --grid " + grid_spec,
                                              c.config_path, cfg);
  Emitter emit(c, out);
  emit.csv_document(manifest, csv.str());
  if (!c.plot_path.empty()) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (!r.scale_factor) continue;
      x.push_back(r.value);
      y.push_back(*r.scale_factor * kRadPerSecPerDegPerHour);
    }
    std::ostringstream plot;
    report::write_plot_data(plot, param + "_" + report::unit_suffix(info.unit), "scale_factor_ma_per_deg_per_h", x, y);
    emit.plot(manifest, plot.str());
  }
  return kOk;
}

int cmd_budget(const Common& c, const std::string& model, const std::vector<std::string>& specs, double applied_deg_h,
               std::ostream& out) {
  const Configuration cfg = load(c);
  std::vector<analysis::ErrorSource> sources;
  for (const auto& spec : specs) {
    const auto parts = split(spec, ':');
    if (parts.size() != 4) throw ConfigError("error source '" + spec + "' must be name:parameter:magnitude:bias|scale");
    analysis::ErrorSource src;
    src.name = parts[0];
    src.parameter = parts[1];
    src.magnitude = parse_double(parts[2], "error source magnitude");
    if (parts[3] == "bias") {
      src.kind = analysis::ErrorSource::Kind::Bias;
    } else if (parts[3] == "scale") {
      src.kind = analysis::ErrorSource::Kind::Scale;
    } else {
      throw ConfigError("error source kind must be bias or scale, got '" + parts[3] + "'");
    }
    sources.push_back(src);
  }
  const auto budget = analysis::error_budget(scheme_config(cfg, model), sources,
                                             RotationRate::from_deg_per_hour(applied_deg_h));
  Emitter emit(c, out);
  if (c.format == "text") {
    emit.text_document(report::to_text(budget));
  } else {
    emit.json_document(report::make_manifest("budget --model " + model, c.config_path, cfg), report::to_json(budget));
  }
  return kOk;
}

int cmd_stability(const Common& c, const std::string& model, double noise_ma, std::ostream& out) {
  const Configuration cfg = load(c);
  const double s = analysis::scale_factor(scheme_config(cfg, model));
  const double rate = analysis::bias_stability_estimate(s, noise_ma);
  const double quoted = model == "nmr" ? analysis::kQuotedNmrBiasStability : analysis::kQuotedSerfBiasStability;
  json body = {{"scheme", model},
               {"noise_floor_ma", noise_ma},
               {"scale_factor_ma_per_rad_per_s", s},
               {"bias_stability_rad_per_s", rate},
               {"bias_stability_deg_per_h", rate / kRadPerSecPerDegPerHour},
               {"quoted_bias_stability_deg_per_h", quoted},
               {"implied_noise_floor_ma", analysis::implied_noise_floor(s * kRadPerSecPerDegPerHour, quoted)}};
  Emitter emit(c, out);
  emit.json_document(report::make_manifest("stability --model " + model, c.config_path, cfg), body);
  return kOk;
}

int cmd_trajectory(const Common& c, const std::string& species_name, const std::vector<double>& field,
                   const std::string& pump, double omega_deg_h, double duration, double dt, std::size_t stride,
                   std::ostream& out) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw ConfigError("--duration and --dt must be > 0");
  if (field.size() != 3) throw ConfigError("--field takes three components bx by bz in tesla");
  const Configuration cfg = load(c);
  const SpeciesParams& species = species_name == "cs" ? cfg.cs : species_name == "xe129" ? cfg.xe129 : cfg.xe131;
  const Eigen::Vector3d axis = pump == "x" ? Eigen::Vector3d::UnitX()
                               : pump == "y" ? Eigen::Vector3d::UnitY()
                                             : Eigen::Vector3d::UnitZ();
  const double p0 = species_name == "cs" ? cfg.nmr.p0 : species.polarization;
  const auto params = bloch::make_params(species, p0, axis);
  const Eigen::Vector3d b(field[0], field[1], field[2]);
  const auto traj = bloch::integrate_bloch<double>(params.p0 * params.pump_axis, [&](double) { return b; },
                                                   RotationRate::from_deg_per_hour(omega_deg_h), params,
                                                   bloch::Integration<double>{dt, duration, stride});
  std::ostringstream csv;
  bloch::write_trajectory_csv(csv, traj);
  Emitter emit(c, out);
  emit.csv_document(report::make_manifest("trajectory --species " + species_name, c.config_path, cfg), csv.str());
  return kOk;
}

}  // namespace

double DisturbanceTable::ambient_at(double time) const {
  if (t.empty()) return 0.0;
  if (time <= t.front()) return ambient.front();
  if (time >= t.back()) return ambient.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (time - t[lo]) / (t[hi] - t[lo]);
  return ambient[lo] + w * (ambient[hi] - ambient[lo]);
}

RotationRate DisturbanceTable::omega_at(double time) const {
  if (t.empty()) return {};
  if (time <= t.front()) return RotationRate::from_rad_per_s(omega.front());
  if (time >= t.back()) return RotationRate::from_rad_per_s(omega.back());
  const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (time - t[lo]) / (t[hi] - t[lo]);
  return RotationRate::from_rad_per_s(omega[lo] + w * (omega[hi] - omega[lo]));
}

DisturbanceTable read_disturbance_csv(std::istream& in) {
  DisturbanceTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    for (auto& cell : cells) {
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
    }
    if (cells.size() != 3) {
      throw ConfigError("disturbance line " + std::to_string(line_no) + " must have 3 columns");
    }
    if (table.t.empty() && line_no == 1 && !cells[0].empty() && std::isalpha(static_cast<unsigned char>(cells[0][0]))) {
      continue;
    }
    const std::string where = "disturbance line " + std::to_string(line_no);
    const double t = parse_double(cells[0], where);
    if (!table.t.empty() && !(t > table.t.back())) throw ConfigError(where + ": times must increase");
    table.t.push_back(t);
    table.ambient.push_back(parse_double(cells[1], where));
    table.omega.push_back(parse_double(cells[2], where));
  }
  if (table.t.empty()) throw ConfigError("disturbance file has no data rows");
  return table;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto parts = split(spec, ':');
  bool logarithmic = false;
  if (!parts.empty() && parts.front() == "log") {
    logarithmic = true;
    parts.erase(parts.begin());
  } else if (parts.size() == 3 && parts[0].rfind("log", 0) == 0 && parts[1].rfind("log", 0) == 0) {
    // logSTART:logSTOP:count spelling
    logarithmic = true;
    parts[0].erase(0, 3);
    parts[1].erase(0, 3);
  }
  if (parts.size() != 3) throw ConfigError("grid '" + spec + "' must be start:stop:count or log:start:stop:count");
  const double start = parse_double(parts[0], "grid start");
  const double stop = parse_double(parts[1], "grid stop");
  const double count_value = parse_double(parts[2], "grid count");
  if (!(count_value >= 1.0) || count_value != std::floor(count_value)) throw ConfigError("grid count must be >= 1");
  const auto count = static_cast<std::size_t>(count_value);
  if (logarithmic && !(start * stop > 0.0)) throw ConfigError("log grid endpoints must be nonzero with equal sign");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = logarithmic ? start * std::pow(stop / start, frac) : start + frac * (stop - start);
  }
  return grid;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compensation-model analysis for NMR and SERF atomic gyroscopes", "gyrocomp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kToolVersion));

  Common common;
  std::string model;
  std::string param;
  std::string grid;
  std::string disturbance;
  std::vector<std::string> sources;
  std::string species = "cs";
  std::string pump = "z";
  std::vector<double> field;
  double duration = 0.0;
  double dt = 0.0;
  double applied = 1.0;
  double noise = 0.0;
  double omega = 0.0;
  std::size_t stride = 1;
  bool closed_loop = false;

  const auto models = CLI::IsMember({"nmr", "serf"});

  auto* sf = app.add_subcommand("scale-factor", "scale factor report");
  sf->add_option("--model", model, "nmr or serf")->required()->check(models);
  add_common(sf, common, true);

  auto* cmp = app.add_subcommand("compare", "side-by-side NMR/SERF comparison");
  add_common(cmp, common, true);

  auto* sim = app.add_subcommand("simulate", "closed-loop NMR field servo simulation");
  sim->add_option("--model", model, "nmr")->required()->check(CLI::IsMember({"nmr"}));
  sim->add_flag("--closed-loop", closed_loop, "run the field servo")->required();
  sim->add_option("--disturbance", disturbance, "CSV of t_s, ambient_by_t, omega_rad_per_s");
  sim->add_option("--duration", duration, "simulated time, s")->required();
  sim->add_option("--emit-plot", common.plot_path, "write t/coil-field plot data");
  add_common(sim, common, false);

  auto* sw = app.add_subcommand("sweep", "scale factor over a parameter grid");
  sw->add_option("--model", model, "nmr or serf")->required()->check(models);
  sw->add_option("--param", param, "parameter id")->required();
  sw->add_option("--grid", grid, "start:stop:count or log:start:stop:count")->required();
  sw->add_option("--emit-plot", common.plot_path, "write value/scale-factor plot data");
  add_common(sw, common, false);

  auto* bud = app.add_subcommand("budget", "rotation-equivalent error budget");
  bud->add_option("--model", model, "nmr or serf")->required()->check(models);
  bud->add_option("--source", sources, "name:parameter:magnitude:bias|scale")->take_all();
  bud->add_option("--applied-deg-per-h", applied, "rotation rate for scale-kind sources");
  add_common(bud, common, true);

  auto* stab = app.add_subcommand("stability", "bias stability from an output-referred noise floor");
  stab->add_option("--model", model, "nmr or serf")->required()->check(models);
  stab->add_option("--noise-ma", noise, "output noise floor, mA")->required();
  add_common(stab, common, false);

  auto* traj = app.add_subcommand("trajectory", "Bloch trajectory under a static field");
  traj->add_option("--species", species, "cs, xe129 or xe131")->check(CLI::IsMember({"cs", "xe129", "xe131"}));
  traj->add_option("--field", field, "bx by bz, T")->expected(3)->required();
  traj->add_option("--pump", pump, "pump axis x, y or z")->check(CLI::IsMember({"x", "y", "z"}));
  traj->add_option("--omega-deg-per-h", omega, "frame rotation about y");
  traj->add_option("--duration", duration, "s")->required();
  traj->add_option("--dt", dt, "integration step, s")->required();
  traj->add_option("--stride", stride, "record every n-th step");
  add_common(traj, common, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sf->parsed()) return cmd_scale_factor(common, model, out);
    if (cmp->parsed()) return cmd_compare(common, out);
    if (sim->parsed()) return cmd_simulate(common, disturbance, duration, out);
    if (sw->parsed()) return cmd_sweep(common, model, param, grid, out);
    if (bud->parsed()) return cmd_budget(common, model, sources, applied, out);
    if (stab->parsed()) return cmd_stability(common, model, noise, out);
    if (traj->parsed()) return cmd_trajectory(common, species, field, pump, omega, duration, dt, stride, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SingularConfigurationError& e) {
    err << "singular configuration: " << e.what() << '\n';
    return kModelError;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kModelError;
  } catch (const DivergenceError& e) {
    err << "simulation diverged: " << e.what() << '\n';
    return kDivergence;
  }
  return kConfigError;
}

}  // namespace gyrocomp::cli
