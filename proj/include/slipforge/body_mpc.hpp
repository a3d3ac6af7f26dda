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

// Slow-timescale tracking controller. The car body is a rigid body driven
// directly by body-frame friction forces; a receding-horizon quadratic
// tracking cost over those forces is minimized by projected gradient descent
// through the discretized dynamics (single shooting, adjoint gradients).

#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "slipforge/vehicle_model.hpp"

namespace slipforge {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

/// Pose and velocity of the car body: [x, y, psi, xdot, ydot, psidot].
struct BodyState {
  double x = 0.0, y = 0.0, psi = 0.0;
  double xdot = 0.0, ydot = 0.0, psidot = 0.0;

  Vec6 to_vec() const;
  static BodyState from_vec(const Vec6& v);
};

/// Body-frame friction forces, ordered [f_fx_b, f_rx_b, f_fy_b, f_ry_b].
struct ForceCommand {
  double f_fx_b = 0.0, f_rx_b = 0.0;
  double f_fy_b = 0.0, f_ry_b = 0.0;

  Vec4 to_vec() const;
  static ForceCommand from_vec(const Vec4& v);
};

/// Time-indexed body states at fixed spacing dt.
struct ReferenceTrajectory {
  std::vector<BodyState> samples;
  double dt = 0.1;

  std::size_t size() const { return samples.size(); }
  /// Window of length count starting at first, padded by repeating the final
  /// sample past the end.
  std::vector<BodyState> window(std::size_t first, std::size_t count) const;
  /// Checks first-order consistency of positions with the stored velocities.
  void validate() const;
};

struct MpcConfig {
  int horizon = 20;       ///< steps of lookahead
  Mat6 Q;                 ///< state tracking weight (symmetric PD)
  Mat4 R;                 ///< force effort weight (symmetric PD)
  Vec4 f_lower, f_upper;  ///< box bounds on each force component [N]
  int max_iters = 200;
  double tol = 1e-3;      ///< projected-gradient norm for convergence

  MpcConfig();

  void validate() const;
  /// Symmetric force box +-bound_scale * d_peak * m * g / 2 per component.
  static MpcConfig with_force_bounds(double d_peak, const VehicleParams& params,
                                     double bound_scale = 1.2);
};

struct MpcReport {
  double cost = 0.0;          ///< cost of the returned sequence
  double cost_zero = 0.0;     ///< cost of the projected all-zero sequence
  int iterations = 0;
  double pg_norm = 0.0;       ///< projected-gradient norm at the last iterate
  bool converged = false;
  bool warm_started = false;
};

/// Rigid-body derivative under body-frame forces. The steering angle never
/// appears: front forces are already expressed in the body frame.
BodyState body_derivative(const BodyState& q, const ForceCommand& f,
                          const VehicleParams& params);

/// One RK4 step of body_derivative with the force held constant. The body
/// subsystem has no wheel states and is not stiff, so no sub-stepping.
BodyState discretize_body(const BodyState& q, const ForceCommand& f, double dt,
                          const VehicleParams& params);

/// One solver instance serves one control loop; it owns the warm-start
/// memory (previous force sequence shifted by one step). Distinct instances
/// are independent and may run concurrently.
class MpcSolver {
 public:
  MpcSolver(MpcConfig cfg, VehicleParams params, double dt);

  /// Solves the tracking problem over a window of exactly cfg.horizon
  /// reference states and returns the first force of the optimized sequence.
  /// The returned cost never exceeds the cost of the projected zero sequence.
  std::pair<ForceCommand, MpcReport> solve(const BodyState& q0,
                                           std::span<const BodyState> ref);

  /// Drops warm-start memory (use between unrelated episodes).
  void reset();

  const MpcConfig& config() const { return cfg_; }
  /// Replaces the force box (the trial loop retightens it as the tyre
  /// estimate improves). Clears warm-start memory.
  void set_force_bounds(const Vec4& lower, const Vec4& upper);

  /// Cost of an explicit force sequence (4*T stacked) -- exposed for tests.
  double rollout_cost(const BodyState& q0, std::span<const BodyState> ref,
                      const Eigen::VectorXd& forces) const;
  /// Adjoint gradient of rollout_cost -- exposed for tests.
  Eigen::VectorXd cost_gradient(const BodyState& q0,
                                std::span<const BodyState> ref,
                                const Eigen::VectorXd& forces) const;

 private:
  Eigen::VectorXd project(const Eigen::VectorXd& forces) const;

  MpcConfig cfg_;
  VehicleParams params_;
  double dt_;
  bool have_warm_start_ = false;
  Eigen::VectorXd warm_start_;
};

}  // namespace slipforge
