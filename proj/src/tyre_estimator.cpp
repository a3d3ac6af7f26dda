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

#include "slipforge/tyre_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slipforge/errors.hpp"

namespace slipforge {

namespace {

double huber(double r, double delta) {
  const double a = std::abs(r);
  if (a <= delta) {
    return 0.5 * r * r;
  }
  return delta * (a - 0.5 * delta);
}

bool inside_open_box(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  for (int j = 0; j < 3; ++j) {
    if (!(x(j) > lo(j)) || !(x(j) < hi(j))) {
      return false;
    }
  }
  return true;
}

Vec3 clamp_inside(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  Vec3 out = x;
  for (int j = 0; j < 3; ++j) {
    const double pad = 1e-6 * (hi(j) - lo(j));
    out(j) = std::clamp(out(j), lo(j) + pad, hi(j) - pad);
  }
  return out;
}

// The model guards on speed and wheel rate do not depend on theta, so one
// pass fixes the usable subset for the whole fit.
bool sample_usable(const Sample& s) {
  const double v = std::hypot(s.state.xdot, s.state.ydot);
  return v > kSpeedMin && s.state.omega_f > kOmegaMin &&
         s.state.omega_r > kOmegaMin;
}

}  // namespace

std::pair<std::vector<Sample>, std::size_t> samples_from_log(
    const std::vector<TimedStep>& log, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("samples_from_log requires dt > 0");
  }
  std::vector<Sample> out;
  std::size_t skipped = 0;
  const double gap_tol = 1e-6 * std::max(1.0, dt);
  for (std::size_t i = 0; i + 1 < log.size(); ++i) {
    const TimedStep& a = log[i];
    const TimedStep& b = log[i + 1];
    if (std::abs((b.t - a.t) - dt) > gap_tol) {
      ++skipped;
      continue;
    }
    Sample s;
    s.state = a.state;
    s.input = a.input;
    s.y << (b.state.xdot - a.state.xdot) / dt,
        (b.state.ydot - a.state.ydot) / dt,
        (b.state.psidot - a.state.psidot) / dt,
        (b.state.omega_f - a.state.omega_f) / dt,
        (b.state.omega_r - a.state.omega_r) / dt;
    out.push_back(s);
  }
  return {out, skipped};
}

SampleSet::SampleSet(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw ConfigError("sample set capacity must be positive");
  }
}

void SampleSet::push(const Sample& s) {
  if (buf_.size() == capacity_) {
    buf_.pop_front();
  }
  buf_.push_back(s);
}

void EstimatorConfig::validate() const {
  for (int j = 0; j < 3; ++j) {
    if (!(lower(j) < upper(j))) {
      throw ConfigError("estimator box must satisfy lower < upper");
    }
  }
  // The box must sit inside the range the friction-curve constructor
  // accepts, otherwise a line-search iterate could throw mid-fit.
  if (!(lower(0) > 0.0) || !(upper(0) <= 50.0) || !(lower(1) > 1.0) ||
      !(upper(1) <= 4.0) || !(lower(2) > 0.0) || !(upper(2) <= 2.0)) {
    throw ConfigError("estimator box exceeds the admissible tyre ranges");
  }
  if (!(huber_delta > 0.0)) {
    throw ConfigError("huber_delta must be positive");
  }
  if (!(lambda_b >= 0.0)) {
    throw ConfigError("lambda_b must be non-negative");
  }
  for (int i = 0; i < 5; ++i) {
    if (!(scales(i) > 0.0)) {
      throw ConfigError("residual scales must be positive");
    }
  }
  if (capacity == 0) {
    throw ConfigError("capacity must be positive");
  }
  if (max_iters < 1) {
    throw ConfigError("max_iters must be at least 1");
  }
  if (!(tol > 0.0)) {
    throw ConfigError("tol must be positive");
  }
}

Vec5 predict_y(const Vec3& theta, const Sample& sample,
               const VehicleParams& params) {
  const TyreParams tyre(theta(0), theta(1), theta(2));
  const StateDerivative d =
      state_derivative(sample.state, sample.input, params, tyre);
  Vec5 y;
  y << d.xddot, d.yddot, d.psiddot, d.omega_f_dot, d.omega_r_dot;
  return y;
}

double estimator_loss(const Vec3& theta, const std::vector<Sample>& samples,
                      const EstimatorConfig& cfg,
                      const VehicleParams& params) {
  double barrier = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double lo = theta(j) - cfg.lower(j);
    const double hi = cfg.upper(j) - theta(j);
    if (!(lo > 0.0) || !(hi > 0.0)) {
      return std::numeric_limits<double>::infinity();
    }
    barrier -= std::log(lo) + std::log(hi);
  }
  if (samples.empty()) {
    return cfg.lambda_b * barrier;
  }
  double data = 0.0;
  for (const Sample& s : samples) {
    const Vec5 r = predict_y(theta, s, params) - s.y;
    for (int i = 0; i < 5; ++i) {
      data += huber(r(i) / cfg.scales(i), cfg.huber_delta);
    }
  }
  return data / static_cast<double>(samples.size()) + cfg.lambda_b * barrier;
}

TyreEstimator::TyreEstimator(EstimatorConfig cfg, VehicleParams params,
                             Vec3 theta0)
    : cfg_(std::move(cfg)), params_(params), samples_(1) {
  cfg_.validate();
  samples_ = SampleSet(cfg_.capacity);
  set_theta(theta0);
}

void TyreEstimator::set_theta(const Vec3& theta) {
  if (!inside_open_box(theta, cfg_.lower, cfg_.upper)) {
    throw ConfigError("tyre estimate must lie strictly inside the box");
  }
  theta_ = theta;
}

TyreParams TyreEstimator::estimate() const {
  return TyreParams(theta_(0), theta_(1), theta_(2));
}

void TyreEstimator::add_log(const std::vector<TimedStep>& log, double dt) {
  const auto [samples, skipped] = samples_from_log(log, dt);
  (void)skipped;
  for (const Sample& s : samples) {
    samples_.push(s);
  }
}

FitReport TyreEstimator::update() {
  FitReport report;
  std::vector<Sample> usable;
  usable.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (sample_usable(samples_[i])) {
      usable.push_back(samples_[i]);
    }
  }
  report.samples_used = usable.size();
  report.samples_skipped = samples_.size() - usable.size();
  if (usable.empty()) {
    return report;
  }

  const auto loss = [&](const Vec3& th) -> double {
    if (!inside_open_box(th, cfg_.lower, cfg_.upper)) {
      return std::numeric_limits<double>::infinity();
    }
    return estimator_loss(th, usable, cfg_, params_);
  };
  const auto grad = [&](const Vec3& th) -> Vec3 {
    Vec3 g;
    for (int j = 0; j < 3; ++j) {
      double h = 1e-6 * std::max(1.0, std::abs(th(j)));
      // Keep both probes strictly inside the box.
      h = std::min(h, 0.5 * (cfg_.upper(j) - th(j)));
      h = std::min(h, 0.5 * (th(j) - cfg_.lower(j)));
      Vec3 p = th, m = th;
      p(j) += h;
      m(j) -= h;
      g(j) = (loss(p) - loss(m)) / (2.0 * h);
    }
    return g;
  };

  Vec3 x = clamp_inside(theta_, cfg_.lower, cfg_.upper);
  double fx = loss(x);
  report.initial_loss = fx;
  if (!std::isfinite(fx)) {
    throw NonFiniteCost("estimator loss is not finite at the start point");
  }
  Vec3 g = grad(x);
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

  int iter = 0;
  for (; iter < cfg_.max_iters; ++iter) {
    report.grad_norm = g.norm();
    if (report.grad_norm <= cfg_.tol) {
      report.converged = true;
      break;
    }
    Vec3 p = -(H * g);
    if (p.dot(g) >= 0.0) {
      H.setIdentity();
      p = -g;
    }

    double alpha = 1.0;
    bool accepted = false;
    Vec3 x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + alpha * p;
      f_new = loss(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * alpha * g.dot(p)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      break;
    }

    const Vec3 g_new = grad(x_new);
    const Vec3 s = x_new - x;
    const Vec3 y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (iter == 0) {
        H *= sy / y.dot(y);
      }
      const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
      const double rho = 1.0 / sy;
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    x = x_new;
    fx = f_new;
    g = g_new;
  }
  report.iterations = iter;
  report.final_loss = fx;
  report.grad_norm = g.norm();
  if (!report.converged) {
    report.converged = report.grad_norm <= cfg_.tol;
  }
  if (fx <= report.initial_loss) {
    theta_ = x;
  }
  return report;
}

}  // namespace slipforge
