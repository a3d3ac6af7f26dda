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

// Friction-curve parameter estimator. Observed accelerations from logged
// transitions are matched against model-predicted accelerations; a Huber
// loss with a log barrier keeping (B, C, D) inside their box is minimized
// by BFGS with finite-difference gradients.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "slipforge/vehicle_model.hpp"

namespace slipforge {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec3 = Eigen::Vector3d;

/// One logged transition: the state and input applied at its start, plus the
/// observed acceleration vector [xddot, yddot, psiddot, omega_f_dot,
/// omega_r_dot] over the step.
struct Sample {
  FullState state;
  ControlInput input;
  Vec5 y = Vec5::Zero();
};

/// A state/input log entry at absolute time t.
struct TimedStep {
  double t = 0.0;
  FullState state;
  ControlInput input;
};

/// Builds samples by forward-differencing the velocity states of
/// consecutive log entries spaced exactly dt apart. Pairs with a different
/// spacing are skipped; the second return value counts them.
std::pair<std::vector<Sample>, std::size_t> samples_from_log(
    const std::vector<TimedStep>& log, double dt);

/// FIFO sample buffer with a hard capacity; pushing into a full buffer
/// drops the oldest sample.
class SampleSet {
 public:
  explicit SampleSet(std::size_t capacity = 20000);

  void push(const Sample& s);
  void clear() { buf_.clear(); }
  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Sample& operator[](std::size_t i) const { return buf_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Sample> buf_;
};

struct EstimatorConfig {
  Vec3 lower{1.0, 1.1, 0.1};   ///< box lower bounds on (B, C, D)
  Vec3 upper{30.0, 3.5, 1.5};  ///< box upper bounds on (B, C, D)
  double huber_delta = 1.0;    ///< transition point of the Huber loss
  double lambda_b = 1e-3;      ///< log-barrier weight
  Vec5 scales{Vec5{1.0, 1.0, 1.0, 10.0, 10.0}};  ///< residual scaling
  std::size_t capacity = 20000;
  int max_iters = 100;
  double tol = 1e-6;  ///< gradient norm for convergence

  void validate() const;
};

struct FitReport {
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;
  bool converged = false;
};

/// Model-predicted acceleration vector for one sample under parameters
/// theta = (B, C, D). Throws the model guard errors for states outside the
/// speed or wheel-rate floors.
Vec5 predict_y(const Vec3& theta, const Sample& sample,
               const VehicleParams& params);

/// Mean Huber data loss over the given samples plus the barrier term.
/// The sample list must already be filtered to states the model accepts.
double estimator_loss(const Vec3& theta, const std::vector<Sample>& samples,
                      const EstimatorConfig& cfg, const VehicleParams& params);

class TyreEstimator {
 public:
  TyreEstimator(EstimatorConfig cfg, VehicleParams params, Vec3 theta0);

  void add_sample(const Sample& s) { samples_.push(s); }
  void add_log(const std::vector<TimedStep>& log, double dt);

  /// One batch fit over the retained samples, starting from the current
  /// estimate. The estimate only moves if the fit did not diverge.
  FitReport update();

  TyreParams estimate() const;
  const Vec3& theta() const { return theta_; }
  void set_theta(const Vec3& theta);
  const SampleSet& samples() const { return samples_; }
  const EstimatorConfig& config() const { return cfg_; }

 private:
  EstimatorConfig cfg_;
  VehicleParams params_;
  Vec3 theta_;
  SampleSet samples_;
};

}  // namespace slipforge
