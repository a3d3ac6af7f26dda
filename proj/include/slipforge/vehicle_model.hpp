// Copyright 2026 The Slipforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Bicycle model with tyre slip and load transfer. Pure value types and pure
// functions; every operation either returns a fully-populated result or
// throws a ModelError subclass. No hidden state, safe to call concurrently.

#pragma once

#include <array>

#include "slipforge/errors.hpp"

namespace slipforge {

/// Wheel spin rates below this floor make the slip-ratio denominators
/// meaningless; operations throw instead of clamping so controller bugs
/// surface early. [rad/s]
inline constexpr double kOmegaMin = 0.1;
/// Same idea for the planar speed used by the sideslip angle. [m/s]
inline constexpr double kSpeedMin = 0.1;
/// Total slip below this is treated as exactly zero friction (the 0/0 limit
/// of the Magic Formula direction factor is 0).
inline constexpr double kSlipEps = 1e-9;
/// Load-transfer denominator floor. [m]
inline constexpr double kLoadDenomEps = 1e-6;

/// Geometric and mechanical constants of the car. Validated on construction:
/// every field strictly positive and h < l_f + l_r.
struct VehicleParams {
  double m;    ///< mass [kg]
  double I_z;  ///< yaw inertia [kg m^2]
  double I_f;  ///< front wheel spin inertia [kg m^2]
  double I_r;  ///< rear wheel spin inertia [kg m^2]
  double r_f;  ///< front wheel radius [m]
  double r_r;  ///< rear wheel radius [m]
  double l_f;  ///< front axle to CoM [m]
  double l_r;  ///< rear axle to CoM [m]
  double h;    ///< CoM height [m]
  double g;    ///< gravitational acceleration [m/s^2]

  VehicleParams(double m, double I_z, double I_f, double I_r, double r_f,
                double r_r, double l_f, double l_r, double h, double g);

  /// Representative large sedan. The acceptance experiments treat these as
  /// config, not ground truth.
  static VehicleParams defaults();
};

/// Pacejka Magic Formula triple. Constructor enforces the plausibility box
/// B in (0, 50], C in (1, 4], D in (0, 2].
struct TyreParams {
  double B;  ///< stiffness factor
  double C;  ///< shape factor
  double D;  ///< peak factor

  TyreParams(double B, double C, double D);
};

/// Slip at which D*sin(C*atan(B*s)) peaks; force grows with slip below it.
double peak_slip(const TyreParams& theta);

/// Inverse of the Magic Formula magnitude on the pre-peak branch.
/// Throws FrictionLimitExceeded if mu >= D.
double magic_formula_inverse(double mu, const TyreParams& theta);

struct FullState {
  double x = 0.0;        ///< [m]
  double y = 0.0;        ///< [m]
  double psi = 0.0;      ///< heading [rad]
  double xdot = 0.0;     ///< inertial velocity [m/s]
  double ydot = 0.0;     ///< inertial velocity [m/s]
  double psidot = 0.0;   ///< yaw rate [rad/s]
  double omega_f = 0.0;  ///< front wheel spin rate [rad/s]
  double omega_r = 0.0;  ///< rear wheel spin rate [rad/s]

  std::array<double, 8> to_array() const;
  static FullState from_array(const std::array<double, 8>& a);
};

struct ControlInput {
  double delta = 0.0;  ///< steering angle [rad]
  double T_f = 0.0;    ///< front wheel torque [N m]
  double T_r = 0.0;    ///< rear wheel torque [N m]
};

/// Contact-point velocities: front in the wheel frame, rear in the body frame.
struct WheelKinematics {
  double v;       ///< planar speed [m/s]
  double beta;    ///< sideslip angle, wrapped to (-pi, pi] [rad]
  double v_fx_w;  ///< [m/s]
  double v_fy_w;  ///< [m/s]
  double v_rx_b;  ///< [m/s]
  double v_ry_b;  ///< [m/s]
};

struct SlipState {
  double s_fx, s_fy;  ///< front component slips
  double s_rx, s_ry;  ///< rear component slips
  double s_f, s_r;    ///< total slips
};

/// Four friction coefficients from the Magic Formula.
struct FrictionCoeffs {
  double mu_fx, mu_fy;
  double mu_rx, mu_ry;
};

struct NormalForces {
  double f_fz;  ///< front axle normal force [N]
  double f_rz;  ///< rear axle normal force [N]
};

/// Friction coefficients, normal forces and the resulting contact forces
/// (front in the wheel frame, rear in the body frame).
struct FrictionState {
  double mu_fx, mu_fy, mu_rx, mu_ry;
  double f_fz, f_rz;
  double f_fx_w, f_fy_w;
  double f_rx_b, f_ry_b;
};

/// Time derivative of FullState, component for component.
struct StateDerivative {
  double xdot, ydot, psidot;
  double xddot, yddot, psiddot;
  double omega_f_dot, omega_r_dot;

  std::array<double, 8> to_array() const;
};

/// Wrap an angle to (-pi, pi].
double wrap_to_pi(double angle);

/// Contact-point velocities for a given steering angle.
/// Throws SpeedBelowFloor when sqrt(xdot^2 + ydot^2) <= kSpeedMin.
WheelKinematics kinematics(const FullState& state, double delta,
                           const VehicleParams& params);

/// Component and total slip ratios.
/// Throws WheelRateBelowFloor when either wheel rate is below kOmegaMin.
SlipState slip_ratios(const WheelKinematics& kin, double omega_f,
                      double omega_r, const VehicleParams& params);

/// mu_ij = -(s_ij/s_i) * D * sin(C * atan(B * s_i)), with both components of
/// a wheel forced to zero when its total slip is below kSlipEps.
FrictionCoeffs magic_formula(const SlipState& slips, const TyreParams& theta);

/// Load-transfer normal forces. The pair always sums to m*g.
/// Throws LoadTransferSingularity when the shared denominator drops below
/// kLoadDenomEps.
NormalForces normal_forces(const FrictionCoeffs& mu, double delta,
                           const VehicleParams& params);

/// Assembles coefficients, normal forces and contact forces for one state.
FrictionState tyre_forces(const SlipState& slips, double delta,
                          const VehicleParams& params, const TyreParams& theta);

/// Full 8-component state derivative of the bicycle model.
StateDerivative state_derivative(const FullState& state,
                                 const ControlInput& input,
                                 const VehicleParams& params,
                                 const TyreParams& theta);

}  // namespace slipforge
