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

#pragma once

#include <Eigen/Dense>

#include "slipforge/vehicle_model.hpp"

namespace slipforge {

struct SimConfig {
  double dt = 0.1;            ///< control interval [s]
  int substeps = 100;         ///< RK4 sub-steps per control interval
  double horizon_time = 10.0; ///< episode length for open-loop runs [s]

  void validate() const;
};

/// Jacobian of [psidot, xddot, yddot, psiddot, omega_f_dot, omega_r_dot]
/// with respect to [psi, xdot, ydot, psidot, omega_f, omega_r], plus the
/// eigenvalue-magnitude spread that measures stiffness.
struct StiffnessReport {
  Eigen::Matrix<double, 6, 6> jacobian;
  double lambda_max_abs;  ///< [1/s]
  double lambda_min_abs;  ///< [1/s]
  double ratio;           ///< lambda_max_abs / lambda_min_abs
};

/// One classical fourth-order Runge-Kutta step with the input held constant.
FullState rk4_step(const FullState& state, const ControlInput& input, double h,
                   const VehicleParams& params, const TyreParams& theta);

/// Advances one control interval by cfg.substeps RK4 steps of size
/// dt/substeps (zero-order hold on the input). The wheel dynamics are stiff;
/// sub-stepping keeps explicit RK4 inside its stability region.
FullState step_interval(const FullState& state, const ControlInput& input,
                        const SimConfig& cfg, const VehicleParams& params,
                        const TyreParams& theta);

/// Central-difference stiffness diagnostic at one operating point.
StiffnessReport jacobian(const FullState& state, const ControlInput& input,
                         const VehicleParams& params, const TyreParams& theta);

}  // namespace slipforge
