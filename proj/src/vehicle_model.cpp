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

#include "slipforge/vehicle_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace slipforge {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw ConfigError(std::string("VehicleParams: ") + name +
                      " must be strictly positive");
  }
}

}  // namespace

VehicleParams::VehicleParams(double m_, double I_z_, double I_f_, double I_r_,
                             double r_f_, double r_r_, double l_f_, double l_r_,
                             double h_, double g_)
    : m(m_), I_z(I_z_), I_f(I_f_), I_r(I_r_), r_f(r_f_), r_r(r_r_), l_f(l_f_),
      l_r(l_r_), h(h_), g(g_) {
  require_positive(m, "m");
  require_positive(I_z, "I_z");
  require_positive(I_f, "I_f");
  require_positive(I_r, "I_r");
  require_positive(r_f, "r_f");
  require_positive(r_r, "r_r");
  require_positive(l_f, "l_f");
  require_positive(l_r, "l_r");
  require_positive(h, "h");
  require_positive(g, "g");
  if (!(h < l_f + l_r)) {
    throw ConfigError("VehicleParams: require h < l_f + l_r");
  }
}

VehicleParams VehicleParams::defaults() {
  return VehicleParams(1845.0, 3500.0, 1.8, 1.8, 0.33, 0.33, 1.42, 1.51, 0.45,
                       9.81);
}

TyreParams::TyreParams(double B_, double C_, double D_) : B(B_), C(C_), D(D_) {
  if (!(B > 0.0 && B <= 50.0)) {
    throw ConfigError("TyreParams: B must be in (0, 50]");
  }
  if (!(C > 1.0 && C <= 4.0)) {
    throw ConfigError("TyreParams: C must be in (1, 4]");
  }
  if (!(D > 0.0 && D <= 2.0)) {
    throw ConfigError("TyreParams: D must be in (0, 2]");
  }
}

double peak_slip(const TyreParams& theta) {
  return std::tan(std::numbers::pi / (2.0 * theta.C)) / theta.B;
}

double magic_formula_inverse(double mu, const TyreParams& theta) {
  if (!(mu >= 0.0)) {
    throw ModelError("magic_formula_inverse: mu must be non-negative");
  }
  if (mu >= theta.D) {
    throw FrictionLimitExceeded("magic_formula_inverse: mu >= D, no slip "
                                "produces the requested friction");
  }
  return std::tan(std::asin(mu / theta.D) / theta.C) / theta.B;
}

std::array<double, 8> FullState::to_array() const {
  return {x, y, psi, xdot, ydot, psidot, omega_f, omega_r};
}

FullState FullState::from_array(const std::array<double, 8>& a) {
  return FullState{a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
}

std::array<double, 8> StateDerivative::to_array() const {
  return {xdot, ydot, psidot, xddot, yddot, psiddot, omega_f_dot, omega_r_dot};
}

double wrap_to_pi(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(angle + std::numbers::pi, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - std::numbers::pi;
}

WheelKinematics kinematics(const FullState& state, double delta,
                           const VehicleParams& params) {
  const double v = std::hypot(state.xdot, state.ydot);
  if (!(v > kSpeedMin)) {
    throw SpeedBelowFloor("kinematics: speed " + std::to_string(v) +
                          " m/s at or below floor");
  }
  const double beta = wrap_to_pi(std::atan2(state.ydot, state.xdot) - state.psi);
  const double sd = std::sin(delta), cd = std::cos(delta);

  WheelKinematics kin{};
  kin.v = v;
  kin.beta = beta;
  kin.v_fx_w = v * std::cos(beta - delta) + state.psidot * params.l_f * sd;
  kin.v_fy_w = v * std::sin(beta - delta) + state.psidot * params.l_f * cd;
  kin.v_rx_b = v * std::cos(beta);
  kin.v_ry_b = v * std::sin(beta) - state.psidot * params.l_r;
  return kin;
}

SlipState slip_ratios(const WheelKinematics& kin, double omega_f,
                      double omega_r, const VehicleParams& params) {
  if (!(omega_f >= kOmegaMin) || !(omega_r >= kOmegaMin)) {
    throw WheelRateBelowFloor("slip_ratios: wheel rate below floor (omega_f=" +
                              std::to_string(omega_f) + ", omega_r=" +
                              std::to_string(omega_r) + ")");
  }
  const double wf = omega_f * params.r_f;
  const double wr = omega_r * params.r_r;

  SlipState s{};
  s.s_fx = (kin.v_fx_w - wf) / wf;
  s.s_fy = kin.v_fy_w / wf;
  s.s_rx = (kin.v_rx_b - wr) / wr;
  s.s_ry = kin.v_ry_b / wr;
  s.s_f = std::hypot(s.s_fx, s.s_fy);
  s.s_r = std::hypot(s.s_rx, s.s_ry);
  return s;
}

FrictionCoeffs magic_formula(const SlipState& slips, const TyreParams& theta) {
  FrictionCoeffs mu{};
  if (slips.s_f >= kSlipEps) {
    const double mf = theta.D * std::sin(theta.C * std::atan(theta.B * slips.s_f));
    mu.mu_fx = -(slips.s_fx / slips.s_f) * mf;
    mu.mu_fy = -(slips.s_fy / slips.s_f) * mf;
  }
  if (slips.s_r >= kSlipEps) {
    const double mf = theta.D * std::sin(theta.C * std::atan(theta.B * slips.s_r));
    mu.mu_rx = -(slips.s_rx / slips.s_r) * mf;
    mu.mu_ry = -(slips.s_ry / slips.s_r) * mf;
  }
  return mu;
}

NormalForces normal_forces(const FrictionCoeffs& mu, double delta,
                           const VehicleParams& params) {
  const double cd = std::cos(delta), sd = std::sin(delta);
  const double front_term = mu.mu_fx * cd - mu.mu_fy * sd;
  const double denom =
      params.l_f + params.l_r + (front_term - mu.mu_rx) * params.h;
  if (!(denom > kLoadDenomEps)) {
    throw LoadTransferSingularity(
        "normal_forces: load-transfer denominator " + std::to_string(denom) +
        " m at or below floor");
  }
  const double mg = params.m * params.g;
  NormalForces f{};
  f.f_fz = (params.l_r - mu.mu_rx * params.h) / denom * mg;
  f.f_rz = (params.l_f + front_term * params.h) / denom * mg;
  return f;
}

FrictionState tyre_forces(const SlipState& slips, double delta,
                          const VehicleParams& params,
                          const TyreParams& theta) {
  const FrictionCoeffs mu = magic_formula(slips, theta);
  const NormalForces fz = normal_forces(mu, delta, params);

  FrictionState f{};
  f.mu_fx = mu.mu_fx;
  f.mu_fy = mu.mu_fy;
  f.mu_rx = mu.mu_rx;
  f.mu_ry = mu.mu_ry;
  f.f_fz = fz.f_fz;
  f.f_rz = fz.f_rz;
  f.f_fx_w = mu.mu_fx * fz.f_fz;
  f.f_fy_w = mu.mu_fy * fz.f_fz;
  f.f_rx_b = mu.mu_rx * fz.f_rz;
  f.f_ry_b = mu.mu_ry * fz.f_rz;
  return f;
}

StateDerivative state_derivative(const FullState& state,
                                 const ControlInput& input,
                                 const VehicleParams& params,
                                 const TyreParams& theta) {
  const WheelKinematics kin = kinematics(state, input.delta, params);
  const SlipState slips =
      slip_ratios(kin, state.omega_f, state.omega_r, params);
  const FrictionState f = tyre_forces(slips, input.delta, params, theta);

  const double cpd = std::cos(state.psi + input.delta);
  const double spd = std::sin(state.psi + input.delta);
  const double cp = std::cos(state.psi), sp = std::sin(state.psi);
  const double cd = std::cos(input.delta), sd = std::sin(input.delta);

  StateDerivative d{};
  d.xdot = state.xdot;
  d.ydot = state.ydot;
  d.psidot = state.psidot;
  d.xddot =
      (f.f_fx_w * cpd - f.f_fy_w * spd + f.f_rx_b * cp - f.f_ry_b * sp) /
      params.m;
  d.yddot =
      (f.f_fx_w * spd + f.f_fy_w * cpd + f.f_rx_b * sp + f.f_ry_b * cp) /
      params.m;
  d.psiddot =
      ((f.f_fy_w * cd + f.f_fx_w * sd) * params.l_f - f.f_ry_b * params.l_r) /
      params.I_z;
  d.omega_f_dot = (input.T_f - f.f_fx_w * params.r_f) / params.I_f;
  d.omega_r_dot = (input.T_r - f.f_rx_b * params.r_r) / params.I_r;
  return d;
}

}  // namespace slipforge
