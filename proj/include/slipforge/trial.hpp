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

// Closed-loop trial harness: a course is swept into a timed reference, each
// trial drives it with the two-layer controller under the current friction
// estimate, and the logged transitions feed the estimator between trials.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slipforge/body_mpc.hpp"
#include "slipforge/sim_engine.hpp"
#include "slipforge/slip_inversion.hpp"
#include "slipforge/tyre_estimator.hpp"
#include "slipforge/vehicle_model.hpp"

namespace slipforge {

struct CourseSegment {
  enum class Kind { Straight, Arc };
  Kind kind = Kind::Straight;
  double length = 0.0;  ///< straight length [m]
  double radius = 0.0;  ///< arc radius [m]
  double angle = 0.0;   ///< signed arc angle [rad], positive turns left

  double arc_length() const;
};

struct CourseSpec {
  double speed = 25.0;  ///< constant target speed [m/s]
  std::vector<CourseSegment> segments;

  double total_length() const;
  void validate() const;

  /// Two same-direction right-angle corners joined by straights.
  static CourseSpec default_course();
};

/// Sweeps the course at constant speed into body states spaced dt apart,
/// endpoints included. The heading accumulates without wrapping.
ReferenceTrajectory generate_reference(const CourseSpec& course, double dt);

/// Full state sitting exactly on the first reference sample with both
/// wheels rolling freely.
FullState initial_state(const ReferenceTrajectory& ref,
                        const VehicleParams& params);

struct EpisodeResult {
  double mse = 0.0;  ///< mean squared position error over the reference
  int scored_steps = 0;
  bool aborted = false;
  std::string abort_reason;
  /// State/input log at the control period; the final entry carries the
  /// terminal state with a zero input.
  std::vector<TimedStep> log;
};

struct EpisodeConfig {
  SimConfig sim;
  InversionConfig inversion;
  double pad_time = 1.0;  ///< extra driven time past the course end [s]
};

/// Drives the reference once. The solver's force bounds and warm start are
/// managed by the caller; the episode resets the warm start at entry.
EpisodeResult run_episode(const ReferenceTrajectory& ref,
                          const VehicleParams& params,
                          const TyreParams& tyre_true,
                          const TyreParams& tyre_estimate, MpcSolver& solver,
                          const EpisodeConfig& cfg);

struct TrialResult {
  int trial = 0;
  double mse = 0.0;
  Vec3 theta_after = Vec3::Zero();
  FitReport fit;
  bool aborted = false;
  std::string abort_reason;
};

struct TrialRunConfig {
  int num_trials = 20;
  EpisodeConfig episode;
  MpcConfig mpc;
  double bound_scale = 1.2;  ///< force box = +-scale * D_hat * m * g / 2
  /// Tyre swap applied from this trial index on (0-based), if set.
  std::optional<int> switch_trial;
  std::optional<TyreParams> switch_tyre;
};

struct TrialObserver {
  /// Called after each trial with its result and log; may be empty.
  std::function<void(const TrialResult&, const EpisodeResult&)> on_trial;
};

/// Iterated tracking experiment: drive, refit, repeat. The estimator keeps
/// its sample buffer across trials.
std::vector<TrialResult> run_trials(const ReferenceTrajectory& ref,
                                    const VehicleParams& params,
                                    const TyreParams& tyre_true,
                                    TyreEstimator& estimator,
                                    const TrialRunConfig& cfg,
                                    const TrialObserver& observer = {});

}  // namespace slipforge
