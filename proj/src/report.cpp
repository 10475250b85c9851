#include "gyrocomp/report.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace gyrocomp::report {

using nlohmann::json;

namespace {

std::string kind_name(Provenance::Kind k) { return k == Provenance::Kind::Reconciled ? "reconciled" : "assumed"; }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Table {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      width.resize(std::max(width.size(), r.size()), 0);
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream os;
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        os << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        if (i + 1 < r.size()) os << "  ";
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

json summary_json(const analysis::SchemeSummary& s) {
  return {{"compensation_equation", s.compensation_equation},
          {"output_signal", s.output_signal},
          {"enhancement_expression", s.enhancement_expression},
          {"scale_factor_ma_per_rad_per_s", s.scale_factor},
          {"scale_factor_ma_per_deg_per_h", s.scale_factor_per_deg_h},
          {"scale_factor_magnitude_ma_per_deg_per_h", std::abs(s.scale_factor_per_deg_h)},
          {"enhancement_factor_1", s.enhancement_factor}};
}

}  // namespace

std::string unit_suffix(const std::string& unit) {
  if (unit == "1") return "1";
  std::string out;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const char ch = unit[i];
    if (ch == '/') {
      out += "_per_";
    } else if (ch == '^') {
      out += (i + 1 < unit.size() && unit[i + 1] == '-') ? "_inv" : "_pow";
      if (i + 1 < unit.size() && unit[i + 1] == '-') ++i;
    } else if (ch == ' ' || ch == '(' || ch == ')') {
      if (!out.empty() && out.back() != '_') out += '_';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  std::string collapsed;
  for (char ch : out) {
    if (ch == '_' && !collapsed.empty() && collapsed.back() == '_') continue;
    collapsed += ch;
  }
  return collapsed;
}

RunManifest make_manifest(std::string command, std::string config_path, const Configuration& cfg) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = std::move(config_path);
  m.parameters = cfg.snapshot();
  m.timestamp = utc_now();
  return m;
}

json to_json(const RunManifest& m) {
  json params = json::object();
  for (const auto& [k, v] : m.parameters) params[k] = v;
  return {{"command", m.command},
          {"config_path", m.config_path},
          {"parameters", params},
          {"tool_version", m.tool_version},
          {"timestamp", m.timestamp}};
}

json to_json(const Provenance& p) {
  return {{"kind", kind_name(p.kind)},
          {"parameter", p.parameter},
          {"printed", p.printed},
          {"adopted", p.adopted},
          {"reason", p.reason}};
}

json to_json(const analysis::Discrepancy& d) {
  json causes = json::array();
  for (const auto& c : d.candidates) {
    causes.push_back({{"cause", c.cause}, {"scale_factor_magnitude_ma_per_deg_per_h", c.scale_factor_ma_per_deg_per_h}});
  }
  return {{"quantity", d.quantity},
          {"computed_ma_per_deg_per_h", d.computed},
          {"quoted_ma_per_deg_per_h", d.quoted},
          {"ratio_1", d.ratio},
          {"candidate_causes", causes}};
}

json to_json(const analysis::ScaleFactorReport& r) {
  json sens = json::object();
  for (const auto& s : r.sensitivities) {
    const std::string suffix = "ma_s_per_rad_per_" + unit_suffix(s.unit);
    json entry = {{"parameter_unit", s.unit},
                  {"value_" + unit_suffix(s.unit), s.value},
                  {"step_" + unit_suffix(s.unit), s.step},
                  {"finite_difference_" + suffix, s.finite_difference}};
    entry["analytic_" + suffix] = s.analytic ? json(*s.analytic) : json(nullptr);
    sens[s.parameter] = entry;
  }
  json unavailable = json::object();
  for (const auto& [id, why] : r.unavailable_sensitivities) unavailable[id] = why;
  json disc = json::array();
  for (const auto& d : r.discrepancies) disc.push_back(to_json(d));
  json prov = json::array();
  for (const auto& p : r.provenance) prov.push_back(to_json(p));
  return {{"scheme", std::string(analysis::to_string(r.scheme))},
          {"scale_factor_ma_per_rad_per_s", r.scale_factor},
          {"scale_factor_magnitude_ma_per_rad_per_s", std::abs(r.scale_factor)},
          {"scale_factor_ma_per_deg_per_h", r.scale_factor_per_deg_h},
          {"scale_factor_magnitude_ma_per_deg_per_h", std::abs(r.scale_factor_per_deg_h)},
          {"enhancement_factor_1", r.enhancement_factor},
          {"implied_noise_floor_ma", r.implied_noise_floor_ma},
          {"sensitivities", sens},
          {"sensitivities_unavailable", unavailable},
          {"discrepancies", disc},
          {"provenance", prov}};
}

json to_json(const analysis::ComparisonReport& r) {
  json disc = json::array();
  for (const auto& d : r.discrepancies) disc.push_back(to_json(d));
  return {{"nmr", summary_json(r.nmr)},
          {"serf", summary_json(r.serf)},
          {"scale_factor_ratio_serf_over_nmr_1", r.scale_factor_ratio},
          {"enhancement_ratio_serf_over_nmr_1", r.enhancement_ratio},
          {"nmr_prefactor_1", r.nmr_prefactor},
          {"relaxation_ratio_t2n2_over_t2a_1", r.relaxation_ratio},
          {"differences", r.differences},
          {"discrepancies", disc}};
}

json to_json(const analysis::ErrorBudget& b) {
  json rows = json::array();
  for (const auto& c : b.contributions) {
    rows.push_back({{"name", c.name},
                    {"parameter", c.parameter},
                    {"kind", std::string(analysis::to_string(c.kind))},
                    {"rate_rad_per_s", c.rate},
                    {"rate_deg_per_h", c.rate / kRadPerSecPerDegPerHour}});
  }
  return {{"contributions", rows},
          {"applied_rate_rad_per_s", b.applied_rate},
          {"rss_total_rad_per_s", b.rss_total},
          {"rss_total_deg_per_h", b.rss_total / kRadPerSecPerDegPerHour}};
}

std::string to_text(const analysis::ScaleFactorReport& r) {
  std::ostringstream os;
  Table head;
  head.row({"scheme", std::string(analysis::to_string(r.scheme))});
  head.row({"scale_factor_ma_per_rad_per_s", format_value(r.scale_factor)});
  head.row({"scale_factor_ma_per_deg_per_h", format_value(r.scale_factor_per_deg_h)});
  head.row({"enhancement_factor_1", format_value(r.enhancement_factor)});
  head.row({"implied_noise_floor_ma", format_value(r.implied_noise_floor_ma)});
  os << head.str() << '\n';
  Table sens;
  sens.row({"parameter", "unit", "value", "dS/dp (finite difference)", "dS/dp (analytic)"});
  for (const auto& s : r.sensitivities) {
    sens.row({s.parameter, s.unit, format_value(s.value), format_value(s.finite_difference),
              s.analytic ? format_value(*s.analytic) : "-"});
  }
  os << sens.str();
  for (const auto& d : r.discrepancies) {
    os << "\ndiscrepancy " << d.quantity << ": computed " << format_value(d.computed) << " vs quoted "
       << format_value(d.quoted) << " mA/(deg/h)\n";
    for (const auto& c : d.candidates) os << "  " << c.cause << " -> " << format_value(c.scale_factor_ma_per_deg_per_h) << '\n';
  }
  for (const auto& p : r.provenance) os << "provenance " << p.parameter << ": " << p.adopted << " (" << p.reason << ")\n";
  return os.str();
}

std::string to_text(const analysis::ComparisonReport& r) {
  Table t;
  t.row({"", "compensation equation", "output signal", "enhancement", "scale_factor_ma_per_deg_per_h"});
  t.row({"NMR", r.nmr.compensation_equation, r.nmr.output_signal, format_value(r.nmr.enhancement_factor),
         format_value(r.nmr.scale_factor_per_deg_h)});
  t.row({"SERF", r.serf.compensation_equation, r.serf.output_signal, format_value(r.serf.enhancement_factor),
         format_value(r.serf.scale_factor_per_deg_h)});
  std::ostringstream os;
  os << t.str() << '\n';
  for (const auto& d : r.differences) os << "- " << d << '\n';
  for (const auto& d : r.discrepancies) {
    os << "discrepancy " << d.quantity << ": computed " << format_value(d.computed) << " vs quoted "
       << format_value(d.quoted) << '\n';
  }
  return os.str();
}

std::string to_text(const analysis::ErrorBudget& b) {
  Table t;
  t.row({"source", "parameter", "kind", "rate_deg_per_h"});
  for (const auto& c : b.contributions) {
    t.row({c.name, c.parameter, std::string(analysis::to_string(c.kind)),
           format_value(c.rate / kRadPerSecPerDegPerHour)});
  }
  t.row({"rss", "", "", format_value(b.rss_total / kRadPerSecPerDegPerHour)});
  return t.str();
}

void write_sweep_csv(std::ostream& os, const analysis::ParameterInfo& param, std::span<const analysis::SweepRow> rows) {
  const auto old = os.precision(17);
  os << param.id << '_' << unit_suffix(param.unit)
     << ",scale_factor_ma_per_rad_per_s,scale_factor_ma_per_deg_per_h,enhancement_factor_1,error\n";
  for (const auto& r : rows) {
    os << r.value << ',';
    if (r.scale_factor) os << *r.scale_factor << ',' << *r.scale_factor * kRadPerSecPerDegPerHour;
    else os << ',';
    os << ',';
    if (r.enhancement_factor) os << *r.enhancement_factor;
    os << ',';
    if (!r.error.empty()) {
      std::string quoted = r.error;
      for (std::size_t pos = 0; (pos = quoted.find('"', pos)) != std::string::npos; pos += 2) quoted.insert(pos, 1, '"');
      os << '"' << quoted << '"';
    }
    os << '\n';
  }
  os.precision(old);
}

void write_loop_csv(std::ostream& os, std::span<const nmr::LoopSample> samples) {
  const auto old = os.precision(17);
  os << "t_s,coil_field_t,omega1_rad_per_s,output_ma\n";
  for (const auto& s : samples) os << s.t << ',' << s.coil_field << ',' << s.omega1 << ',' << s.output << '\n';
  os.precision(old);
}

void write_plot_data(std::ostream& os, const std::string& x_label, const std::string& y_label,
                     std::span<const double> x, std::span<const double> y) {
  const auto old = os.precision(17);
  os << "# " << x_label << ' ' << y_label << '\n';
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) os << x[i] << ' ' << y[i] << '\n';
  os.precision(old);
}

}  // namespace gyrocomp::report
