#pragma once

// Spin polarization dynamics. Closed-form steady states used by the gyroscope
// models, and a fixed-step RK4 Bloch integrator that serves as their oracle.
//
// Sign convention: dP/dt = P x (gamma B + Omega y_hat) - R (P - P0 a_hat), where
// R relaxes the component along the pump axis a_hat at 1/T1 and the transverse
// components at 1/T2. With this orientation a y field acting on z-pumped
// polarization produces P_x = -P0 T2 gamma B_y at small fields.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <vector>

#include "gyrocomp/errors.hpp"
#include "gyrocomp/quantities.hpp"

namespace gyrocomp::bloch {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// (px, py, pz), dimensionless.
template <typename Scalar>
using SpinState = Vector3<Scalar>;

/// (bx, by, bz) in tesla.
template <typename Scalar>
using FieldVector = Vector3<Scalar>;

template <typename Scalar = double>
struct BlochParams {
  Scalar gamma = Scalar(0);  // angular, rad s^-1 T^-1
  Scalar t1 = Scalar(1);
  Scalar t2 = Scalar(1);
  Scalar p0 = Scalar(0);
  Vector3<Scalar> pump_axis = Vector3<Scalar>::UnitZ();

  void validate() const {
    using std::abs;
    using std::isfinite;
    if (!(t1 > Scalar(0)) || !(t2 > Scalar(0))) throw ConfigError("Bloch relaxation times must be positive");
    if (!(p0 >= Scalar(0) && p0 <= Scalar(1))) throw ConfigError("Bloch p0 must lie in [0, 1]");
    if (!(abs(pump_axis.norm() - Scalar(1)) < Scalar(1e-9))) throw ConfigError("pump axis must be a unit vector");
    if (!isfinite(static_cast<double>(gamma))) throw ConfigError("gyromagnetic ratio is not finite");
  }

  template <typename Other>
  BlochParams<Other> cast() const {
    return {Other(gamma), Other(t1), Other(t2), Other(p0), pump_axis.template cast<Other>()};
  }
};

inline BlochParams<double> make_params(const SpeciesParams& species, double p0,
                                      const Eigen::Vector3d& pump_axis = Eigen::Vector3d::UnitZ()) {
  BlochParams<double> p{species.gamma.angular(), species.relaxation.t1, species.relaxation.t2, p0, pump_axis};
  p.validate();
  return p;
}

enum class Form { Full, Approximate };

/// Steady-state nuclear P_y for z pumping under (bx, by + Omega/gamma, bz - b_az). The full form is exact
/// for isotropic relaxation (t1 = t2); the approximate form is P0 (by + Omega/gamma) / (bz - b_az).
template <typename Scalar>
Scalar serf_nuclear_pny(Scalar bx, Scalar by, Scalar bz, Scalar b_az, RotationRate omega_y,
                        const BlochParams<Scalar>& params, Form form = Form::Full) {
  const Scalar by_eff = by + Scalar(omega_y.rad_per_s()) / params.gamma;
  const Scalar bz_eff = bz - b_az;
  if (form == Form::Approximate) {
    if (bz_eff == Scalar(0)) throw SingularConfigurationError("B_z equals B_az: approximate P_ny is singular");
    return params.p0 * by_eff / bz_eff;
  }
  const Scalar damping_field = Scalar(1) / (params.t2 * params.gamma);
  const Scalar num = damping_field * bx + by_eff * bz_eff;
  const Scalar den = bx * bx + by_eff * by_eff + bz_eff * bz_eff + damping_field * damping_field;
  return params.p0 * num / den;
}

/// Linearized steady-state alkali P_x = -P0 T2 gamma B_ay for z pumping.
template <typename Scalar>
Scalar serf_alkali_px(Scalar b_ay, const BlochParams<Scalar>& params, Warnings* warnings = nullptr) {
  using std::abs;
  const Scalar tilt = params.gamma * b_ay * params.t2;
  if (abs(tilt) > Scalar(0.1)) {
    std::ostringstream msg;
    msg << "linearized alkali response outside validity: |gamma B_ay T2| = " << static_cast<double>(abs(tilt));
    warn(warnings, msg.str());
  }
  return -params.p0 * tilt;
}

/// Instantaneous alkali P_x for y pumping while the second nuclear magnetization b_xz rotates in the xz plane
/// at angle omega2 t + psi. The approximate form P0 (b_xz / b_y) cos(angle) needs b_y >> b_xz, 1/(T2 gamma).
template <typename Scalar>
Scalar nmr_modulated_px(Scalar b_xz, Scalar b_y, Scalar omega2, Scalar psi, Scalar t,
                        const BlochParams<Scalar>& params, Form form = Form::Approximate) {
  using std::cos;
  using std::sin;
  const Scalar angle = omega2 * t + psi;
  if (form == Form::Approximate) {
    if (b_y == Scalar(0)) throw SingularConfigurationError("B_y = 0: approximate modulated P_x is singular");
    return params.p0 * b_xz / b_y * cos(angle);
  }
  const Scalar damping_field = Scalar(1) / (params.t2 * params.gamma);
  const Scalar num = damping_field * b_xz * sin(angle) + b_xz * cos(angle) * b_y;
  const Scalar den = b_xz * b_xz + b_y * b_y + damping_field * damping_field;
  return params.p0 * num / den;
}

template <typename Scalar>
struct TrajectoryPoint {
  Scalar t;
  SpinState<Scalar> p;
};

template <typename Scalar>
using Trajectory = std::vector<TrajectoryPoint<Scalar>>;

template <typename Scalar>
struct Integration {
  Scalar dt;
  Scalar duration;
  std::size_t record_stride = 1;
};

namespace detail {

template <typename Scalar>
Vector3<Scalar> relax(const Vector3<Scalar>& v, const BlochParams<Scalar>& params) {
  const Scalar transverse = Scalar(1) / params.t2;
  const Scalar extra = Scalar(1) / params.t1 - transverse;
  return transverse * v + extra * params.pump_axis.dot(v) * params.pump_axis;
}

template <typename Scalar>
Vector3<Scalar> rhs(const SpinState<Scalar>& p, const Vector3<Scalar>& precession, const BlochParams<Scalar>& params) {
  return p.cross(precession) - relax<Scalar>(p - params.p0 * params.pump_axis, params);
}

}  // namespace detail

/// Fixed-step RK4 integration of the Bloch equation in a frame rotating at omega_y about y.
/// `field_at(t)` returns the lab field. Rejects dt >= min(T1, T2)/50 or dt >= 2 pi / (10 max|gamma B + Omega|).
template <typename Scalar, typename FieldFn>
Trajectory<Scalar> integrate_bloch(const SpinState<Scalar>& initial, FieldFn&& field_at, RotationRate omega_y,
                                   const BlochParams<Scalar>& params, const Integration<Scalar>& grid) {
  using std::abs;
  using std::ceil;
  params.validate();
  if (!(grid.dt > Scalar(0)) || !(grid.duration > Scalar(0))) {
    throw PreconditionError("integration step and duration must be positive");
  }
  if (grid.record_stride == 0) throw PreconditionError("record stride must be >= 1");
  if (initial.norm() > Scalar(1) + Scalar(1e-9)) throw PreconditionError("initial polarization norm exceeds 1");
  if (!(grid.dt < std::min(params.t1, params.t2) / Scalar(50))) {
    std::ostringstream msg;
    msg << "step " << static_cast<double>(grid.dt) << " s not below relaxation limit "
        << static_cast<double>(std::min(params.t1, params.t2) / Scalar(50)) << " s";
    throw PreconditionError(msg.str());
  }

  const auto steps = static_cast<std::size_t>(ceil(grid.duration / grid.dt - Scalar(1e-9)));
  const Vector3<Scalar> rotation = Scalar(omega_y.rad_per_s()) * Vector3<Scalar>::UnitY();
  auto precession_at = [&](Scalar t) -> Vector3<Scalar> {
    return params.gamma * FieldVector<Scalar>(field_at(t)) + rotation;
  };

  Scalar max_rate(0);
  for (std::size_t k = 0; k <= steps; ++k) {
    max_rate = std::max(max_rate, precession_at(grid.dt * Scalar(k)).norm());
  }
  if (max_rate > Scalar(0) && !(grid.dt < Scalar(kTwoPi) / (Scalar(10) * max_rate))) {
    std::ostringstream msg;
    msg << "step " << static_cast<double>(grid.dt) << " s not below precession limit "
        << static_cast<double>(Scalar(kTwoPi) / (Scalar(10) * max_rate)) << " s";
    throw PreconditionError(msg.str());
  }

  Trajectory<Scalar> out;
  out.reserve(steps / grid.record_stride + 2);
  SpinState<Scalar> p = initial;
  out.push_back({Scalar(0), p});
  const Scalar h = grid.dt;
  const Scalar half = h / Scalar(2);
  for (std::size_t k = 0; k < steps; ++k) {
    const Scalar t = h * Scalar(k);
    const Vector3<Scalar> w0 = precession_at(t);
    const Vector3<Scalar> wm = precession_at(t + half);
    const Vector3<Scalar> w1 = precession_at(t + h);
    const SpinState<Scalar> k1 = detail::rhs<Scalar>(p, w0, params);
    const SpinState<Scalar> k2 = detail::rhs<Scalar>(p + half * k1, wm, params);
    const SpinState<Scalar> k3 = detail::rhs<Scalar>(p + half * k2, wm, params);
    const SpinState<Scalar> k4 = detail::rhs<Scalar>(p + h * k3, w1, params);
    p += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    if ((k + 1) % grid.record_stride == 0 || k + 1 == steps) out.push_back({h * Scalar(k + 1), p});
  }
  return out;
}

/// Integrates from P0 * pump_axis under a static field for `relaxation_times` x max(T1, T2) and returns the
/// final state. The step is chosen just inside both integrator bounds.
template <typename Scalar>
SpinState<Scalar> integrate_to_steady_state(const FieldVector<Scalar>& field, RotationRate omega_y,
                                            const BlochParams<Scalar>& params, Scalar relaxation_times = Scalar(20)) {
  const Scalar rate = (params.gamma * field + Scalar(omega_y.rad_per_s()) * Vector3<Scalar>::UnitY()).norm();
  Scalar dt = std::min(params.t1, params.t2) / Scalar(50);
  if (rate > Scalar(0)) dt = std::min(dt, Scalar(kTwoPi) / (Scalar(10) * rate));
  dt *= Scalar(0.99);
  const Scalar duration = relaxation_times * std::max(params.t1, params.t2);
  const auto steps = static_cast<std::size_t>(duration / dt) + 1;
  auto traj = integrate_bloch<Scalar>(params.p0 * params.pump_axis, [&](Scalar) { return field; }, omega_y, params,
                                      Integration<Scalar>{duration / Scalar(steps), duration, steps});
  return traj.back().p;
}

/// CSV with header `t_s,px,py,pz`.
template <typename Scalar>
void write_trajectory_csv(std::ostream& os, const Trajectory<Scalar>& trajectory) {
  const auto old_precision = os.precision(17);
  os << "t_s,px,py,pz\n";
  for (const auto& point : trajectory) {
    os << static_cast<double>(point.t) << ',' << static_cast<double>(point.p.x()) << ','
       << static_cast<double>(point.p.y()) << ',' << static_cast<double>(point.p.z()) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace gyrocomp::bloch
