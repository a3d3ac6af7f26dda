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

#include "slipforge/trial.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "slipforge/errors.hpp"

namespace slipforge {

namespace {

struct SegmentCursor {
  double s0 = 0.0;  // arclength at segment start
  double x0 = 0.0, y0 = 0.0, h0 = 0.0;
};

BodyState pose_at(const CourseSegment& seg, const SegmentCursor& c,
                  double s_local, double speed) {
  BodyState b;
  if (seg.kind == CourseSegment::Kind::Straight) {
    b.x = c.x0 + s_local * std::cos(c.h0);
    b.y = c.y0 + s_local * std::sin(c.h0);
    b.psi = c.h0;
    b.xdot = speed * std::cos(c.h0);
    b.ydot = speed * std::sin(c.h0);
    b.psidot = 0.0;
    return b;
  }
  const double sigma = seg.angle < 0.0 ? -1.0 : 1.0;
  const double R = seg.radius;
  const double h = c.h0 + sigma * s_local / R;
  const double cx = c.x0 - sigma * R * std::sin(c.h0);
  const double cy = c.y0 + sigma * R * std::cos(c.h0);
  b.x = cx + sigma * R * std::sin(h);
  b.y = cy - sigma * R * std::cos(h);
  b.psi = h;
  b.xdot = speed * std::cos(h);
  b.ydot = speed * std::sin(h);
  b.psidot = sigma * speed / R;
  return b;
}

}  // namespace

double CourseSegment::arc_length() const {
  if (kind == Kind::Straight) {
    return length;
  }
  return radius * std::abs(angle);
}

double CourseSpec::total_length() const {
  double total = 0.0;
  for (const CourseSegment& seg : segments) {
    total += seg.arc_length();
  }
  return total;
}

void CourseSpec::validate() const {
  if (!(speed > kSpeedMin)) {
    throw ConfigError("course speed must exceed the model speed floor");
  }
  if (segments.empty()) {
    throw ConfigError("course needs at least one segment");
  }
  for (const CourseSegment& seg : segments) {
    if (seg.kind == CourseSegment::Kind::Straight) {
      if (!(seg.length > 0.0)) {
        throw ConfigError("straight segment length must be positive");
      }
    } else {
      if (!(seg.radius > 0.0)) {
        throw ConfigError("arc segment radius must be positive");
      }
      if (seg.angle == 0.0 || !std::isfinite(seg.angle)) {
        throw ConfigError("arc segment angle must be nonzero");
      }
    }
  }
}

CourseSpec CourseSpec::default_course() {
  using K = CourseSegment::Kind;
  const double quarter = std::numbers::pi / 2.0;
  CourseSpec c;
  c.speed = 25.0;
  c.segments = {
      CourseSegment{K::Straight, 50.0, 0.0, 0.0},
      CourseSegment{K::Arc, 0.0, 100.0, quarter},
      CourseSegment{K::Straight, 60.0, 0.0, 0.0},
      CourseSegment{K::Arc, 0.0, 100.0, quarter},
      CourseSegment{K::Straight, 50.0, 0.0, 0.0},
  };
  return c;
}

ReferenceTrajectory generate_reference(const CourseSpec& course, double dt) {
  course.validate();
  if (!(dt > 0.0)) {
    throw ConfigError("reference dt must be positive");
  }
  std::vector<SegmentCursor> cursors;
  cursors.reserve(course.segments.size());
  SegmentCursor c;
  for (const CourseSegment& seg : course.segments) {
    cursors.push_back(c);
    const BodyState end = pose_at(seg, c, seg.arc_length(), course.speed);
    c.s0 += seg.arc_length();
    c.x0 = end.x;
    c.y0 = end.y;
    c.h0 = end.psi;
  }
  const double total_len = course.total_length();
  const double total_time = total_len / course.speed;
  const std::size_t n =
      static_cast<std::size_t>(std::floor(total_time / dt + 1e-9)) + 1;

  ReferenceTrajectory ref;
  ref.dt = dt;
  ref.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(course.speed * (dt * static_cast<double>(k)),
                              total_len);
    std::size_t i = 0;
    while (i + 1 < course.segments.size() &&
           s >= cursors[i].s0 + course.segments[i].arc_length()) {
      ++i;
    }
    ref.samples.push_back(pose_at(course.segments[i], cursors[i],
                                  s - cursors[i].s0, course.speed));
  }
  ref.validate();
  return ref;
}

FullState initial_state(const ReferenceTrajectory& ref,
                        const VehicleParams& params) {
  if (ref.samples.empty()) {
    throw ConfigError("reference trajectory is empty");
  }
  const BodyState& b = ref.samples.front();
  const double v = std::hypot(b.xdot, b.ydot);
  if (!(v > kSpeedMin)) {
    throw ConfigError("reference must start above the model speed floor");
  }
  const double beta = wrap_to_pi(std::atan2(b.ydot, b.xdot) - b.psi);
  // Free rolling at zero steering: both wheels see the body-frame
  // longitudinal velocity of their axle.
  const double v_fx_w = v * std::cos(beta);
  const double v_rx_b = v * std::cos(beta);
  FullState s;
  s.x = b.x;
  s.y = b.y;
  s.psi = b.psi;
  s.xdot = b.xdot;
  s.ydot = b.ydot;
  s.psidot = b.psidot;
  s.omega_f = v_fx_w / params.r_f;
  s.omega_r = v_rx_b / params.r_r;
  return s;
}

EpisodeResult run_episode(const ReferenceTrajectory& ref,
                          const VehicleParams& params,
                          const TyreParams& tyre_true,
                          const TyreParams& tyre_estimate, MpcSolver& solver,
                          const EpisodeConfig& cfg) {
  ref.validate();
  cfg.sim.validate();
  cfg.inversion.validate();
  if (std::abs(cfg.sim.dt - ref.dt) > 1e-12) {
    throw ConfigError("episode requires sim dt to match the reference dt");
  }
  if (!(cfg.pad_time >= 0.0)) {
    throw ConfigError("pad_time must be non-negative");
  }

  const double dt = ref.dt;
  const std::size_t n_ref = ref.size();
  const std::size_t pad_steps =
      static_cast<std::size_t>(std::llround(cfg.pad_time / dt));
  const std::size_t total_steps = (n_ref - 1) + pad_steps;
  const std::size_t horizon =
      static_cast<std::size_t>(solver.config().horizon);

  solver.reset();
  EpisodeResult out;
  out.log.reserve(total_steps + 1);
  FullState state = initial_state(ref, params);

  double acc = 0.0;
  std::size_t steps_done = 0;
  for (std::size_t t = 0; t < total_steps; ++t) {
    try {
      const BodyState q0{state.x,    state.y,    state.psi,
                         state.xdot, state.ydot, state.psidot};
      const std::vector<BodyState> window = ref.window(t + 1, horizon);
      const auto [demand, mpc_report] = solver.solve(q0, window);
      const auto [input, inv_report] =
          force_to_input(demand, state, params, tyre_estimate,
                         cfg.inversion, dt);
      const FullState next =
          step_interval(state, input, cfg.sim, params, tyre_true);
      out.log.push_back(TimedStep{dt * static_cast<double>(t), state, input});
      state = next;
      steps_done = t + 1;
      if (t + 1 < n_ref) {
        const BodyState& r = ref.samples[t + 1];
        const double dx = state.x - r.x;
        const double dy = state.y - r.y;
        acc += dx * dx + dy * dy;
        ++out.scored_steps;
      }
    } catch (const ModelError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    }
  }
  out.log.push_back(TimedStep{dt * static_cast<double>(steps_done), state,
                              ControlInput{0.0, 0.0, 0.0}});
  out.mse = out.scored_steps > 0
                ? acc / static_cast<double>(out.scored_steps)
                : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<TrialResult> run_trials(const ReferenceTrajectory& ref,
                                    const VehicleParams& params,
                                    const TyreParams& tyre_true,
                                    TyreEstimator& estimator,
                                    const TrialRunConfig& cfg,
                                    const TrialObserver& observer) {
  if (cfg.num_trials < 1) {
    throw ConfigError("num_trials must be at least 1");
  }
  if (!(cfg.bound_scale > 0.0)) {
    throw ConfigError("bound_scale must be positive");
  }
  MpcSolver solver(cfg.mpc, params, ref.dt);

  std::vector<TrialResult> results;
  results.reserve(static_cast<std::size_t>(cfg.num_trials));
  for (int k = 0; k < cfg.num_trials; ++k) {
    const bool switched = cfg.switch_trial.has_value() &&
                          cfg.switch_tyre.has_value() &&
                          k >= *cfg.switch_trial;
    const TyreParams& tyre = switched ? *cfg.switch_tyre : tyre_true;

    const double bound = cfg.bound_scale * estimator.estimate().D * params.m *
                         params.g / 2.0;
    solver.set_force_bounds(Vec4::Constant(-bound), Vec4::Constant(bound));

    const EpisodeResult ep = run_episode(ref, params, tyre,
                                         estimator.estimate(), solver, cfg.episode);
    estimator.add_log(ep.log, ref.dt);
    const FitReport fit = estimator.update();

    TrialResult r;
    r.trial = k;
    r.mse = ep.mse;
    r.theta_after = estimator.theta();
    r.fit = fit;
    r.aborted = ep.aborted;
    r.abort_reason = ep.abort_reason;
    results.push_back(r);
    if (observer.on_trial) {
      observer.on_trial(r, ep);
    }
  }
  return results;
}

}  // namespace slipforge
