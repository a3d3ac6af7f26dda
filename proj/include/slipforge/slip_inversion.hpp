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

// Fast-timescale inversion layer. The slow controller emits body-frame axle
// forces; this layer converts them to a steering angle, slip targets and
// wheel torques through the tyre model, analytically where the geometry
// allows and by bracketed root finding for the front steering angle.

#pragma once

#include "slipforge/body_mpc.hpp"
#include "slipforge/vehicle_model.hpp"

namespace slipforge {

struct InversionConfig {
  double delta_max = 0.6;      ///< steering clamp [rad]
  double torque_max = 6000.0;  ///< wheel torque clamp [N m]
  double f_eps = 1.0;          ///< demand below this is treated as zero [N]
  double v_lat_eps = 1e-3;     ///< lateral velocity degeneracy floor [m/s]
  double margin = 0.02;        ///< demanded mu must stay below D*(1-margin)
  double residual_tol = 1e-8;  ///< slip-consistency residual at the root
  int max_iter = 200;          ///< bisection iteration cap

  void validate() const;
};

/// Slip targets produced by the inversion, with the steering angle that
/// realizes the front pair.
struct SlipTargets {
  double s_fx = 0.0, s_fy = 0.0;
  double s_rx = 0.0, s_ry = 0.0;
  double delta = 0.0;
};

struct RearSolution {
  double s_rx = 0.0;
  double s_ry = 0.0;
};

struct FrontSolution {
  double delta = 0.0;
  double s_fx = 0.0;
  double s_fy = 0.0;
  /// Demand rotated into the wheel frame at the solved steering angle.
  double f_fx_w = 0.0;
  double f_fy_w = 0.0;
};

struct InversionReport {
  SlipTargets targets;
  double demand_scale = 1.0;  ///< < 1 when the demand was shrunk to the
                              ///< friction margin
  bool delta_clamped = false;
  bool torque_f_clamped = false;
  bool torque_r_clamped = false;
  double f_fz = 0.0, f_rz = 0.0;  ///< normal forces implied by the demand
};

/// Rear axle slips from direction matching. The rear wheel cannot steer, so
/// only the slip direction is imposed; the magnitude follows from the body
/// kinematics. Throws FrictionLimitExceeded when the demanded mu is outside
/// the margin and InfeasibleDirection when no forward-rolling wheel speed
/// can realize the demanded direction.
RearSolution invert_rear(double f_rx_b, double f_ry_b, double v_rx_b,
                         double v_ry_b, double f_rz, const TyreParams& tyre,
                         const InversionConfig& cfg);

/// Front axle: finds the steering angle at which the kinematically implied
/// slip, antiparallel to the rotated demand, reproduces the demanded force
/// magnitude through the friction curve. Bracketed bisection over the
/// steering range with a Newton polish.
FrontSolution invert_front(double f_fx_b, double f_fy_b, double v, double beta,
                           double psidot, double f_fz, const TyreParams& tyre,
                           const VehicleParams& params,
                           const InversionConfig& cfg);

/// Torque that lands the wheel on its slip target one control period ahead
/// while sustaining the demanded longitudinal force.
double front_torque(double f_fx_w, double s_fx, double v_fx_w, double omega_f0,
                    const VehicleParams& params, double dt);
double rear_torque(double f_rx_b, double s_rx, double v_rx_b, double omega_r0,
                   const VehicleParams& params, double dt);

/// Full force-to-input pipeline: normal forces from the demand, friction
/// margin enforcement (whole-demand rescale), rear then front inversion,
/// torque laws, actuator clamps.
std::pair<ControlInput, InversionReport> force_to_input(
    const ForceCommand& demand, const FullState& state,
    const VehicleParams& params, const TyreParams& tyre,
    const InversionConfig& cfg, double dt);

}  // namespace slipforge
