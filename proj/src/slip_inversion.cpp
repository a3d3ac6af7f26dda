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

#include "slipforge/slip_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "slipforge/errors.hpp"

namespace slipforge {

namespace {

constexpr int kGridPoints = 801;

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Lateral front-wheel velocity at steering angle delta.
double lateral_wheel_velocity(double delta, double v, double beta,
                              double psidot, double l_f) {
  return v * std::sin(beta - delta) + psidot * l_f * std::cos(delta);
}

double longitudinal_wheel_velocity(double delta, double v, double beta,
                                   double psidot, double l_f) {
  return v * std::cos(beta - delta) + psidot * l_f * std::sin(delta);
}

// Steering angle that zeroes the lateral front-wheel velocity.
double neutral_steering(double v, double beta, double psidot, double l_f) {
  return std::atan2(v * std::sin(beta) + psidot * l_f, v * std::cos(beta));
}

}  // namespace

void InversionConfig::validate() const {
  if (!(delta_max > 0.0) || !(delta_max < 1.5)) {
    throw ConfigError("delta_max must lie in (0, 1.5) rad");
  }
  if (!(torque_max > 0.0)) {
    throw ConfigError("torque_max must be positive");
  }
  if (!(f_eps > 0.0)) {
    throw ConfigError("f_eps must be positive");
  }
  if (!(v_lat_eps > 0.0)) {
    throw ConfigError("v_lat_eps must be positive");
  }
  if (!(margin >= 0.0) || !(margin < 0.5)) {
    throw ConfigError("margin must lie in [0, 0.5)");
  }
  if (!(residual_tol > 0.0)) {
    throw ConfigError("residual_tol must be positive");
  }
  if (max_iter < 10) {
    throw ConfigError("max_iter must be at least 10");
  }
}

RearSolution invert_rear(double f_rx_b, double f_ry_b, double v_rx_b,
                         double v_ry_b, double f_rz, const TyreParams& tyre,
                         const InversionConfig& cfg) {
  if (!(f_rz > 0.0)) {
    throw LoadTransferSingularity("rear normal force must be positive");
  }
  const double demand = std::hypot(f_rx_b, f_ry_b);
  if (demand < cfg.f_eps) {
    return RearSolution{0.0, 0.0};
  }
  const double mu_target = demand / f_rz;
  const double mu_limit = tyre.D * (1.0 - cfg.margin);
  if (mu_target >= mu_limit) {
    throw FrictionLimitExceeded(
        "rear demand " + std::to_string(mu_target) +
        " exceeds friction margin " + std::to_string(mu_limit));
  }

  if (std::abs(f_ry_b) <= cfg.f_eps && std::abs(v_ry_b) <= cfg.v_lat_eps) {
    // Pure longitudinal: slip opposes the demanded drive or brake force and
    // the friction curve fixes its magnitude.
    const double s = magic_formula_inverse(std::abs(f_rx_b) / f_rz, tyre);
    return RearSolution{-sign_of(f_rx_b) * s, 0.0};
  }

  const double cross = v_rx_b * f_ry_b - f_rx_b * v_ry_b;
  const double cross_floor =
      1e-9 * std::max(1.0, std::abs(v_rx_b) * demand + std::abs(v_ry_b) * demand);
  if (std::abs(cross) < cross_floor) {
    throw InfeasibleDirection(
        "rear demand is parallel to the contact velocity; no wheel speed "
        "realizes it");
  }
  // Direction matching fixes both slips. When the demanded sign is not
  // reachable yet (no rear sideslip has developed) this yields a tiny slip
  // and a negligible realized force, which is the best the axle can do.
  const double s_ry = v_ry_b * f_ry_b / cross;
  const double s_rx = f_rx_b * v_ry_b / cross;
  return RearSolution{s_rx, s_ry};
}

FrontSolution invert_front(double f_fx_b, double f_fy_b, double v, double beta,
                           double psidot, double f_fz, const TyreParams& tyre,
                           const VehicleParams& params,
                           const InversionConfig& cfg) {
  if (!(f_fz > 0.0)) {
    throw LoadTransferSingularity("front normal force must be positive");
  }
  const double l_f = params.l_f;
  const double delta_n =
      std::clamp(neutral_steering(v, beta, psidot, l_f), -cfg.delta_max,
                 cfg.delta_max);

  const double demand = std::hypot(f_fx_b, f_fy_b);
  FrontSolution sol;
  if (demand < cfg.f_eps) {
    // Nothing demanded: hold the wheel along its velocity so no slip builds.
    sol.delta = delta_n;
    sol.f_fx_w = std::cos(delta_n) * f_fx_b + std::sin(delta_n) * f_fy_b;
    sol.f_fy_w = -std::sin(delta_n) * f_fx_b + std::cos(delta_n) * f_fy_b;
    return sol;
  }

  const double mu_target = demand / f_fz;
  const double mu_limit = tyre.D * (1.0 - cfg.margin);
  if (mu_target >= mu_limit) {
    throw FrictionLimitExceeded(
        "front demand " + std::to_string(mu_target) +
        " exceeds friction margin " + std::to_string(mu_limit));
  }
  const double s_star = magic_formula_inverse(mu_target, tyre);

  // 2D cross products are invariant under the common wheel-frame rotation,
  // so the demand/velocity cross term is one number for every steering
  // angle.
  const double v_fx_b = v * std::cos(beta);
  const double v_fy_b = v * std::sin(beta) + psidot * l_f;
  const double cross = v_fx_b * f_fy_b - f_fx_b * v_fy_b;
  const double v_mag = std::hypot(v_fx_b, v_fy_b);
  const double cross_floor = 1e-9 * std::max(1.0, v_mag * demand);

  if (std::abs(cross) < cross_floor) {
    // Demand parallel to the contact velocity: steering to the neutral
    // angle makes the problem purely longitudinal.
    const double vdotf = v_fx_b * f_fx_b + v_fy_b * f_fy_b;
    sol.delta = delta_n;
    sol.s_fy = 0.0;
    sol.s_fx = -sign_of(vdotf) * s_star;
    sol.f_fx_w = std::cos(delta_n) * f_fx_b + std::sin(delta_n) * f_fy_b;
    sol.f_fy_w = -std::sin(delta_n) * f_fx_b + std::cos(delta_n) * f_fy_b;
    return sol;
  }

  // On the physical branch the total slip is demand * |v_fy_w| / |cross|
  // with sign(v_fy_w) = -sign(cross); the signed residual below is positive
  // exactly where a root can sit.
  const double sgn = sign_of(cross);
  const auto residual = [&](double delta) {
    const double v_fy_w = lateral_wheel_velocity(delta, v, beta, psidot, l_f);
    return (-sgn * v_fy_w) * demand / std::abs(cross) - s_star;
  };

  // Scan, bracket sign changes, bisect, then polish.
  std::vector<double> roots;
  const double lo = -cfg.delta_max, hi = cfg.delta_max;
  const double step = (hi - lo) / (kGridPoints - 1);
  double prev_delta = lo;
  double prev_r = residual(lo);
  for (int i = 1; i < kGridPoints; ++i) {
    const double d = lo + step * i;
    const double r = residual(d);
    if (prev_r == 0.0) {
      roots.push_back(prev_delta);
    } else if (std::isfinite(prev_r) && std::isfinite(r) &&
               prev_r * r < 0.0) {
      double a = prev_delta, b = d, ra = prev_r;
      for (int it = 0; it < cfg.max_iter && (b - a) > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        const double rm = residual(m);
        if (rm == 0.0) {
          a = b = m;
          break;
        }
        if (ra * rm < 0.0) {
          b = m;
        } else {
          a = m;
          ra = rm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_delta = d;
    prev_r = r;
  }
  if (prev_r == 0.0) {
    roots.push_back(prev_delta);
  }

  // Newton polish with a numeric derivative; the residual is a smooth
  // sinusoid in delta so a handful of steps reaches machine precision.
  for (double& root : roots) {
    for (int it = 0; it < 30; ++it) {
      const double r = residual(root);
      if (std::abs(r) <= 1e-13) {
        break;
      }
      const double h = 1e-7;
      const double dr = (residual(root + h) - residual(root - h)) / (2.0 * h);
      if (!std::isfinite(dr) || std::abs(dr) < 1e-12) {
        break;
      }
      const double next = std::clamp(root - r / dr, lo, hi);
      if (next == root) {
        break;
      }
      root = next;
    }
  }

  bool found = false;
  double best = 0.0;
  for (double root : roots) {
    if (std::abs(residual(root)) > cfg.residual_tol) {
      continue;
    }
    const double v_fx_w = longitudinal_wheel_velocity(root, v, beta, psidot,
                                                      l_f);
    if (!(v_fx_w > 0.0)) {
      continue;  // wheel would have to roll backwards
    }
    if (!found || std::abs(root - delta_n) < std::abs(best - delta_n)) {
      best = root;
      found = true;
    }
  }
  if (!found) {
    throw NoRootInBracket(
        "front inversion: no steering angle in range realizes the demanded "
        "force");
  }

  const double v_fy_w = lateral_wheel_velocity(best, v, beta, psidot, l_f);
  sol.delta = best;
  sol.f_fx_w = std::cos(best) * f_fx_b + std::sin(best) * f_fy_b;
  sol.f_fy_w = -std::sin(best) * f_fx_b + std::cos(best) * f_fy_b;
  sol.s_fx = v_fy_w * sol.f_fx_w / cross;
  sol.s_fy = v_fy_w * sol.f_fy_w / cross;
  return sol;
}

double front_torque(double f_fx_w, double s_fx, double v_fx_w, double omega_f0,
                    const VehicleParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("front_torque requires dt > 0");
  }
  if (std::abs(1.0 + s_fx) < 1e-6) {
    throw TargetSlipAtMinusOne("front slip target at -1 has no wheel speed");
  }
  const double omega_target = v_fx_w / (params.r_f * (1.0 + s_fx));
  return f_fx_w * params.r_f +
         2.0 * params.I_f / dt * (omega_target - omega_f0);
}

double rear_torque(double f_rx_b, double s_rx, double v_rx_b, double omega_r0,
                   const VehicleParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("rear_torque requires dt > 0");
  }
  if (std::abs(1.0 + s_rx) < 1e-6) {
    throw TargetSlipAtMinusOne("rear slip target at -1 has no wheel speed");
  }
  const double omega_target = v_rx_b / (params.r_r * (1.0 + s_rx));
  return f_rx_b * params.r_r +
         2.0 * params.I_r / dt * (omega_target - omega_r0);
}

std::pair<ControlInput, InversionReport> force_to_input(
    const ForceCommand& demand, const FullState& state,
    const VehicleParams& params, const TyreParams& tyre,
    const InversionConfig& cfg, double dt) {
  cfg.validate();
  if (!(dt > 0.0)) {
    throw ConfigError("force_to_input requires dt > 0");
  }

  const double v = std::hypot(state.xdot, state.ydot);
  if (v <= kSpeedMin) {
    throw SpeedBelowFloor("force_to_input: speed " + std::to_string(v) +
                          " at or below floor");
  }
  const double beta = wrap_to_pi(std::atan2(state.ydot, state.xdot) -
                                 state.psi);
  const double wheelbase = params.l_f + params.l_r;
  const double weight = params.m * params.g;

  InversionReport report;
  ForceCommand d = demand;
  const double mu_limit = tyre.D * (1.0 - cfg.margin);
  double f_fz = 0.0, f_rz = 0.0;
  bool within_margin = false;
  // Shrinking the demand shifts the normal forces, which feeds back into
  // the friction ratios, so iterate with a small slack under the limit.
  for (int pass = 0; pass <= 8; ++pass) {
    const double fx_total = d.f_fx_b + d.f_rx_b;
    f_fz = (weight * params.l_r - params.h * fx_total) / wheelbase;
    f_rz = weight - f_fz;
    if (f_fz <= kLoadDenomEps * weight || f_rz <= kLoadDenomEps * weight) {
      throw LoadTransferSingularity(
          "demanded forces push a normal load to zero");
    }
    const double mu_f = std::hypot(d.f_fx_b, d.f_fy_b) / f_fz;
    const double mu_r = std::hypot(d.f_rx_b, d.f_ry_b) / f_rz;
    const double worst = std::max(mu_f, mu_r);
    if (worst < mu_limit) {
      within_margin = true;
      break;
    }
    if (pass == 8) {
      break;
    }
    const double shrink = mu_limit / worst * (1.0 - 1e-4);
    d.f_fx_b *= shrink;
    d.f_rx_b *= shrink;
    d.f_fy_b *= shrink;
    d.f_ry_b *= shrink;
    report.demand_scale *= shrink;
  }
  if (!within_margin) {
    throw FrictionLimitExceeded(
        "demand could not be rescaled inside the friction margin: demand (" +
        std::to_string(d.f_fx_b) + ", " + std::to_string(d.f_rx_b) + ", " +
        std::to_string(d.f_fy_b) + ", " + std::to_string(d.f_ry_b) +
        "), normals (" + std::to_string(f_fz) + ", " + std::to_string(f_rz) +
        "), limit " + std::to_string(mu_limit));
  }
  report.f_fz = f_fz;
  report.f_rz = f_rz;

  const double v_rx_b = v * std::cos(beta);
  const double v_ry_b = v * std::sin(beta) - state.psidot * params.l_r;

  const RearSolution rear =
      invert_rear(d.f_rx_b, d.f_ry_b, v_rx_b, v_ry_b, f_rz, tyre, cfg);
  const FrontSolution front = invert_front(d.f_fx_b, d.f_fy_b, v, beta,
                                           state.psidot, f_fz, tyre, params,
                                           cfg);

  report.targets =
      SlipTargets{front.s_fx, front.s_fy, rear.s_rx, rear.s_ry, front.delta};

  double delta = front.delta;
  if (delta > cfg.delta_max || delta < -cfg.delta_max) {
    delta = std::clamp(delta, -cfg.delta_max, cfg.delta_max);
    report.delta_clamped = true;
  }

  const double v_fx_w =
      longitudinal_wheel_velocity(front.delta, v, beta, state.psidot,
                                  params.l_f);
  double torque_f = front_torque(front.f_fx_w, front.s_fx, v_fx_w,
                                 state.omega_f, params, dt);
  double torque_r = rear_torque(d.f_rx_b, rear.s_rx, v_rx_b, state.omega_r,
                                params, dt);
  if (std::abs(torque_f) > cfg.torque_max) {
    torque_f = std::clamp(torque_f, -cfg.torque_max, cfg.torque_max);
    report.torque_f_clamped = true;
  }
  if (std::abs(torque_r) > cfg.torque_max) {
    torque_r = std::clamp(torque_r, -cfg.torque_max, cfg.torque_max);
    report.torque_r_clamped = true;
  }

  return {ControlInput{delta, torque_f, torque_r}, report};
}

}  // namespace slipforge
