#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gyrocomp/nmr.hpp"
#include "gyrocomp/quantities.hpp"
#include "gyrocomp/serf.hpp"

namespace gyrocomp::analysis {

enum class Scheme { Nmr, Serf };

std::string_view to_string(Scheme scheme);

using SchemeConfig = std::variant<nmr::NmrConfig, serf::SerfConfig>;

Scheme scheme_of(const SchemeConfig& cfg);

/// Reference scale factors quoted for the Cs-Xe parameter set, mA per (deg/h), as magnitudes.
inline constexpr double kQuotedNmrScaleFactor = 4.05e-3;
inline constexpr double kQuotedSerfScaleFactor = 6.24e-3;
/// Quoted bias stabilities, deg/h. Only used to back out implied noise floors.
inline constexpr double kQuotedNmrBiasStability = 0.003;
inline constexpr double kQuotedSerfBiasStability = 0.002;

/// gamma_num / gamma_den - 1.
double enhancement_factor(GyromagneticRatio gamma_num, GyromagneticRatio gamma_den);

double enhancement_factor(const SchemeConfig& cfg);

/// Signed scale factor, mA per rad/s.
double scale_factor(const SchemeConfig& cfg);

/// Output with compensation engaged: servoed NMR or steady-state SERF nuclei, mA.
double compensated_output(const SchemeConfig& cfg, RotationRate omega_y);

struct ParameterInfo {
  std::string id;
  std::string unit;
  std::string description;
};

const std::vector<ParameterInfo>& parameters(Scheme scheme);

/// Throws ConfigError for an id the scheme does not know.
const ParameterInfo& parameter_info(Scheme scheme, std::string_view id);

double get_parameter(const SchemeConfig& cfg, std::string_view id);
SchemeConfig with_parameter(SchemeConfig cfg, std::string_view id, double value);

/// Closed-form dS/dp where the scale-factor expression supplies one.
std::optional<double> analytic_sensitivity(const SchemeConfig& cfg, std::string_view id);

struct Sensitivity {
  std::string parameter;
  std::string unit;
  double value = 0.0;  // parameter value
  double step = 0.0;   // absolute finite-difference step
  double finite_difference = 0.0;
  std::optional<double> analytic;
};

/// Central finite difference of the scale factor at step relative_step * |p|.
/// Throws PreconditionError when the step collapses under floating point.
Sensitivity sensitivity(const SchemeConfig& cfg, std::string_view id, double relative_step = 1e-4);

struct ErrorSource {
  enum class Kind { Bias, Scale };
  std::string name;
  std::string parameter;
  double magnitude = 0.0;  // in the parameter's unit
  Kind kind = Kind::Scale;
};

std::string_view to_string(ErrorSource::Kind kind);

struct Contribution {
  std::string name;
  std::string parameter;
  ErrorSource::Kind kind;
  double rate;  // rad/s, rotation-rate equivalent
};

struct ErrorBudget {
  std::vector<Contribution> contributions;  // descending
  double rss_total = 0.0;                   // rad/s
  double applied_rate = 0.0;                // rad/s used for scale-kind sources
};

/// Scale-kind sources contribute |dS/dp| dp |Omega_applied| / |S|; bias-kind sources contribute
/// |dO/dp| dp / |S| with O the compensated output at zero rotation.
ErrorBudget error_budget(const SchemeConfig& cfg, std::span<const ErrorSource> sources,
                         RotationRate applied = RotationRate::from_deg_per_hour(1.0));

/// noise_floor / |scale_factor|, rad/s. scale_factor in mA per rad/s, noise in mA.
double bias_stability_estimate(double scale_factor, double noise_floor);

/// Inverse of bias_stability_estimate: |scale_factor| * bias_stability.
double implied_noise_floor(double scale_factor, double bias_stability);

struct SweepRow {
  double value = 0.0;
  std::optional<double> scale_factor;        // mA per rad/s
  std::optional<double> enhancement_factor;
  std::string error;
};

/// One row per grid point, in grid order. Points are evaluated concurrently; failures stay in their row.
std::vector<SweepRow> sweep(const SchemeConfig& cfg, std::string_view id, std::span<const double> grid);

struct CandidateCause {
  std::string cause;
  double scale_factor_ma_per_deg_per_h;  // magnitude under that alternative reading
};

struct Discrepancy {
  std::string quantity;
  double computed = 0.0;  // magnitude, mA per (deg/h)
  double quoted = 0.0;
  double ratio = 0.0;     // computed / quoted
  std::vector<CandidateCause> candidates;
};

/// Entry when |computed| differs from the quoted value by more than 5%, otherwise empty.
std::optional<Discrepancy> scale_factor_discrepancy(const SchemeConfig& cfg);

struct ScaleFactorReport {
  Scheme scheme;
  double scale_factor = 0.0;  // mA per rad/s
  double scale_factor_per_deg_h = 0.0;
  double enhancement_factor = 0.0;
  std::vector<Sensitivity> sensitivities;
  std::vector<std::pair<std::string, std::string>> unavailable_sensitivities;  // id, reason
  std::vector<Discrepancy> discrepancies;
  std::vector<Provenance> provenance;
  double implied_noise_floor_ma = 0.0;  // backed out of the quoted bias stability
};

ScaleFactorReport make_scale_factor_report(const SchemeConfig& cfg, std::vector<Provenance> provenance = {});

struct SchemeSummary {
  std::string compensation_equation;
  std::string output_signal;
  std::string enhancement_expression;
  double scale_factor = 0.0;  // mA per rad/s
  double scale_factor_per_deg_h = 0.0;
  double enhancement_factor = 0.0;
};

struct ComparisonReport {
  SchemeSummary nmr;
  SchemeSummary serf;
  double scale_factor_ratio = 0.0;   // |S_serf| / |S_nmr|
  double enhancement_ratio = 0.0;    // |serf enhancement| / |nmr enhancement|
  double nmr_prefactor = 0.0;        // 1/2 (B_n2 / B_y) sqrt(T2n2 / T1n2)
  double relaxation_ratio = 0.0;     // T2n2 / T2a
  std::vector<std::string> differences;
  std::vector<Discrepancy> discrepancies;
};

ComparisonReport compare(const nmr::NmrConfig& nmr_cfg, const serf::SerfConfig& serf_cfg);

}  // namespace gyrocomp::analysis
