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

#include "slipforge/body_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slipforge/errors.hpp"

namespace slipforge {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kBacktrackFactor = 0.5;
constexpr int kMaxBacktracks = 60;

// Jacobian of the body derivative w.r.t. the state; only the velocity
// passthrough block and the heading sensitivity of the rotated force are
// nonzero.
Mat6 state_jacobian(const BodyState& q, const ForceCommand& f,
                    const VehicleParams& p) {
  const double fx = f.f_fx_b + f.f_rx_b;
  const double fy = f.f_fy_b + f.f_ry_b;
  const double c = std::cos(q.psi), s = std::sin(q.psi);
  Mat6 J = Mat6::Zero();
  J(0, 3) = 1.0;
  J(1, 4) = 1.0;
  J(2, 5) = 1.0;
  J(3, 2) = (-fx * s - fy * c) / p.m;
  J(4, 2) = (fx * c - fy * s) / p.m;
  return J;
}

// Jacobian w.r.t. the force command [f_fx_b, f_rx_b, f_fy_b, f_ry_b].
Eigen::Matrix<double, 6, 4> force_jacobian(const BodyState& q,
                                           const VehicleParams& p) {
  const double c = std::cos(q.psi), s = std::sin(q.psi);
  Eigen::Matrix<double, 6, 4> J = Eigen::Matrix<double, 6, 4>::Zero();
  J(3, 0) = c / p.m;
  J(3, 1) = c / p.m;
  J(3, 2) = -s / p.m;
  J(3, 3) = -s / p.m;
  J(4, 0) = s / p.m;
  J(4, 1) = s / p.m;
  J(4, 2) = c / p.m;
  J(4, 3) = c / p.m;
  J(5, 2) = p.l_f / p.I_z;
  J(5, 3) = -p.l_r / p.I_z;
  return J;
}

struct StepLinearization {
  Mat6 A;                          // d next / d state
  Eigen::Matrix<double, 6, 4> B;  // d next / d force
};

BodyState axpy(const BodyState& q, double a, const BodyState& d) {
  BodyState r;
  r.x = q.x + a * d.x;
  r.y = q.y + a * d.y;
  r.psi = q.psi + a * d.psi;
  r.xdot = q.xdot + a * d.xdot;
  r.ydot = q.ydot + a * d.ydot;
  r.psidot = q.psidot + a * d.psidot;
  return r;
}

// RK4 step together with its exact differentials (chain rule through the
// four stages; the force is held constant over the step).
BodyState rk4_with_jacobians(const BodyState& q, const ForceCommand& f,
                             double h, const VehicleParams& p,
                             StepLinearization* lin) {
  const BodyState k1 = body_derivative(q, f, p);
  const BodyState q2 = axpy(q, 0.5 * h, k1);
  const BodyState k2 = body_derivative(q2, f, p);
  const BodyState q3 = axpy(q, 0.5 * h, k2);
  const BodyState k3 = body_derivative(q3, f, p);
  const BodyState q4 = axpy(q, h, k3);
  const BodyState k4 = body_derivative(q4, f, p);

  BodyState out;
  out.x = q.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.y = q.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  out.psi = q.psi + h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
  out.xdot =
      q.xdot + h / 6.0 * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
  out.ydot =
      q.ydot + h / 6.0 * (k1.ydot + 2.0 * k2.ydot + 2.0 * k3.ydot + k4.ydot);
  out.psidot = q.psidot + h / 6.0 * (k1.psidot + 2.0 * k2.psidot +
                                     2.0 * k3.psidot + k4.psidot);

  if (lin != nullptr) {
    const Mat6 I = Mat6::Identity();
    const Mat6 J1 = state_jacobian(q, f, p);
    const Mat6 J2 = state_jacobian(q2, f, p);
    const Mat6 J3 = state_jacobian(q3, f, p);
    const Mat6 J4 = state_jacobian(q4, f, p);
    const Mat6 A1 = J1;
    const Mat6 A2 = J2 * (I + 0.5 * h * A1);
    const Mat6 A3 = J3 * (I + 0.5 * h * A2);
    const Mat6 A4 = J4 * (I + h * A3);
    lin->A = I + h / 6.0 * (A1 + 2.0 * A2 + 2.0 * A3 + A4);

    const Eigen::Matrix<double, 6, 4> G1 = force_jacobian(q, p);
    const Eigen::Matrix<double, 6, 4> G2 = force_jacobian(q2, p);
    const Eigen::Matrix<double, 6, 4> G3 = force_jacobian(q3, p);
    const Eigen::Matrix<double, 6, 4> G4 = force_jacobian(q4, p);
    const Eigen::Matrix<double, 6, 4> B1 = G1;
    const Eigen::Matrix<double, 6, 4> B2 = G2 + J2 * (0.5 * h * B1);
    const Eigen::Matrix<double, 6, 4> B3 = G3 + J3 * (0.5 * h * B2);
    const Eigen::Matrix<double, 6, 4> B4 = G4 + J4 * (h * B3);
    lin->B = h / 6.0 * (B1 + 2.0 * B2 + 2.0 * B3 + B4);
  }
  return out;
}

void check_spd(const Eigen::MatrixXd& M, const char* name) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + M.norm())) {
    throw ConfigError(std::string(name) + " weight must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError(std::string(name) + " weight must be positive definite");
  }
}

}  // namespace

Vec6 BodyState::to_vec() const {
  Vec6 v;
  v << x, y, psi, xdot, ydot, psidot;
  return v;
}

BodyState BodyState::from_vec(const Vec6& v) {
  return BodyState{v(0), v(1), v(2), v(3), v(4), v(5)};
}

Vec4 ForceCommand::to_vec() const {
  Vec4 v;
  v << f_fx_b, f_rx_b, f_fy_b, f_ry_b;
  return v;
}

ForceCommand ForceCommand::from_vec(const Vec4& v) {
  return ForceCommand{v(0), v(1), v(2), v(3)};
}

std::vector<BodyState> ReferenceTrajectory::window(std::size_t first,
                                                   std::size_t count) const {
  if (samples.empty()) {
    throw ConfigError("reference trajectory is empty");
  }
  std::vector<BodyState> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = std::min(first + k, samples.size() - 1);
    out.push_back(samples[idx]);
  }
  return out;
}

void ReferenceTrajectory::validate() const {
  if (dt <= 0.0) {
    throw ConfigError("reference dt must be positive");
  }
  if (samples.empty()) {
    throw ConfigError("reference trajectory is empty");
  }
  for (const BodyState& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.psi) ||
        !std::isfinite(s.xdot) || !std::isfinite(s.ydot) ||
        !std::isfinite(s.psidot)) {
      throw ConfigError("reference trajectory contains non-finite sample");
    }
  }
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const BodyState& a = samples[k];
    const BodyState& b = samples[k + 1];
    const double speed = std::hypot(a.xdot, a.ydot);
    const double tol = 0.05 * (1.0 + speed * dt);
    const double ex = (b.x - a.x) / dt - 0.5 * (a.xdot + b.xdot);
    const double ey = (b.y - a.y) / dt - 0.5 * (a.ydot + b.ydot);
    if (std::abs(ex) * dt > tol || std::abs(ey) * dt > tol) {
      throw ConfigError(
          "reference trajectory positions inconsistent with velocities at "
          "sample " +
          std::to_string(k));
    }
  }
}

MpcConfig::MpcConfig() {
  Q = Mat6::Zero();
  Q.diagonal() << 10.0, 10.0, 1.0, 0.1, 0.1, 0.1;
  R = 1e-8 * Mat4::Identity();
  const VehicleParams p = VehicleParams::defaults();
  const double bound = 1.2 * 0.5 * p.m * p.g / 2.0;
  f_lower = Vec4::Constant(-bound);
  f_upper = Vec4::Constant(bound);
}

void MpcConfig::validate() const {
  if (horizon < 1) {
    throw ConfigError("mpc horizon must be at least 1");
  }
  if (max_iters < 1) {
    throw ConfigError("mpc max_iters must be at least 1");
  }
  if (!(tol > 0.0)) {
    throw ConfigError("mpc tol must be positive");
  }
  check_spd(Q, "Q");
  check_spd(R, "R");
  for (int i = 0; i < 4; ++i) {
    if (!(f_lower(i) <= f_upper(i))) {
      throw ConfigError("mpc force bounds must satisfy lower <= upper");
    }
  }
}

MpcConfig MpcConfig::with_force_bounds(double d_peak,
                                       const VehicleParams& params,
                                       double bound_scale) {
  if (!(d_peak > 0.0) || !(bound_scale > 0.0)) {
    throw ConfigError("force bound scale factors must be positive");
  }
  MpcConfig cfg;
  const double bound = bound_scale * d_peak * params.m * params.g / 2.0;
  cfg.f_lower = Vec4::Constant(-bound);
  cfg.f_upper = Vec4::Constant(bound);
  return cfg;
}

BodyState body_derivative(const BodyState& q, const ForceCommand& f,
                          const VehicleParams& p) {
  const double fx = f.f_fx_b + f.f_rx_b;
  const double fy = f.f_fy_b + f.f_ry_b;
  const double c = std::cos(q.psi), s = std::sin(q.psi);
  BodyState d;
  d.x = q.xdot;
  d.y = q.ydot;
  d.psi = q.psidot;
  d.xdot = (fx * c - fy * s) / p.m;
  d.ydot = (fx * s + fy * c) / p.m;
  d.psidot = (f.f_fy_b * p.l_f - f.f_ry_b * p.l_r) / p.I_z;
  return d;
}

BodyState discretize_body(const BodyState& q, const ForceCommand& f, double dt,
                          const VehicleParams& params) {
  if (!(dt > 0.0)) {
    throw ConfigError("discretize_body requires dt > 0");
  }
  return rk4_with_jacobians(q, f, dt, params, nullptr);
}

MpcSolver::MpcSolver(MpcConfig cfg, VehicleParams params, double dt)
    : cfg_(std::move(cfg)), params_(params), dt_(dt) {
  cfg_.validate();
  if (!(dt_ > 0.0)) {
    throw ConfigError("mpc dt must be positive");
  }
}

void MpcSolver::reset() {
  have_warm_start_ = false;
  warm_start_.resize(0);
}

void MpcSolver::set_force_bounds(const Vec4& lower, const Vec4& upper) {
  for (int i = 0; i < 4; ++i) {
    if (!(lower(i) <= upper(i))) {
      throw ConfigError("mpc force bounds must satisfy lower <= upper");
    }
  }
  cfg_.f_lower = lower;
  cfg_.f_upper = upper;
  reset();
}

Eigen::VectorXd MpcSolver::project(const Eigen::VectorXd& forces) const {
  Eigen::VectorXd out = forces;
  const int T = cfg_.horizon;
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < 4; ++i) {
      out(4 * t + i) =
          std::clamp(out(4 * t + i), cfg_.f_lower(i), cfg_.f_upper(i));
    }
  }
  return out;
}

double MpcSolver::rollout_cost(const BodyState& q0,
                               std::span<const BodyState> ref,
                               const Eigen::VectorXd& forces) const {
  const int T = cfg_.horizon;
  double cost = 0.0;
  BodyState q = q0;
  for (int t = 0; t < T; ++t) {
    const ForceCommand f = ForceCommand::from_vec(forces.segment<4>(4 * t));
    q = rk4_with_jacobians(q, f, dt_, params_, nullptr);
    const Vec6 e = q.to_vec() - ref[static_cast<std::size_t>(t)].to_vec();
    const Vec4 fv = f.to_vec();
    cost += e.dot(cfg_.Q * e) + fv.dot(cfg_.R * fv);
  }
  return cost;
}

Eigen::VectorXd MpcSolver::cost_gradient(const BodyState& q0,
                                         std::span<const BodyState> ref,
                                         const Eigen::VectorXd& forces) const {
  const int T = cfg_.horizon;
  std::vector<StepLinearization> lin(static_cast<std::size_t>(T));
  std::vector<Vec6> err(static_cast<std::size_t>(T));
  BodyState q = q0;
  for (int t = 0; t < T; ++t) {
    const ForceCommand f = ForceCommand::from_vec(forces.segment<4>(4 * t));
    q = rk4_with_jacobians(q, f, dt_, params_,
                           &lin[static_cast<std::size_t>(t)]);
    err[static_cast<std::size_t>(t)] =
        q.to_vec() - ref[static_cast<std::size_t>(t)].to_vec();
  }

  Eigen::VectorXd grad(4 * T);
  Vec6 lambda = Vec6::Zero();
  for (int t = T - 1; t >= 0; --t) {
    const auto& l = lin[static_cast<std::size_t>(t)];
    // lambda currently holds dJ/dq_{t+2} pulled back to q_{t+1}; add the
    // stage cost at q_{t+1} before descending.
    lambda += 2.0 * (cfg_.Q * err[static_cast<std::size_t>(t)]);
    const Vec4 fv = forces.segment<4>(4 * t);
    grad.segment<4>(4 * t) = 2.0 * (cfg_.R * fv) + l.B.transpose() * lambda;
    lambda = l.A.transpose() * lambda;
  }
  return grad;
}

std::pair<ForceCommand, MpcReport> MpcSolver::solve(
    const BodyState& q0, std::span<const BodyState> ref) {
  const int T = cfg_.horizon;
  if (ref.size() != static_cast<std::size_t>(T)) {
    throw ConfigError("mpc reference window must match the horizon length");
  }

  MpcReport report;
  const Eigen::VectorXd zero_seq = project(Eigen::VectorXd::Zero(4 * T));
  report.cost_zero = rollout_cost(q0, ref, zero_seq);

  Eigen::VectorXd x = zero_seq;
  double fx_cost = report.cost_zero;
  if (have_warm_start_ && warm_start_.size() == 4 * T) {
    // Shift the previous plan one step forward, repeating the tail force.
    Eigen::VectorXd shifted(4 * T);
    shifted.head(4 * (T - 1)) = warm_start_.tail(4 * (T - 1));
    shifted.tail(4) = warm_start_.tail(4);
    shifted = project(shifted);
    const double warm_cost = rollout_cost(q0, ref, shifted);
    if (warm_cost < fx_cost) {
      x = shifted;
      fx_cost = warm_cost;
      report.warm_started = true;
    }
  }
  if (!std::isfinite(fx_cost)) {
    throw NonFiniteCost("mpc initial cost is not finite");
  }

  Eigen::VectorXd g = cost_gradient(q0, ref, x);
  Eigen::VectorXd x_prev = x, g_prev = g;
  double alpha = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  int iter = 0;
  for (; iter < cfg_.max_iters; ++iter) {
    const Eigen::VectorXd pg = x - project(x - g);
    report.pg_norm = pg.norm();
    if (report.pg_norm <= cfg_.tol) {
      report.converged = true;
      break;
    }

    if (iter > 0) {
      const Eigen::VectorXd s = x - x_prev;
      const Eigen::VectorXd yv = g - g_prev;
      const double sy = s.dot(yv);
      if (sy > 1e-30) {
        alpha = std::clamp(s.dot(s) / sy, 1e-12, 1e12);
      }
    }

    double step = alpha;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      const Eigen::VectorXd cand = project(x - step * g);
      const Eigen::VectorXd d = cand - x;
      const double gd = g.dot(d);
      const double cand_cost = rollout_cost(q0, ref, cand);
      if (std::isfinite(cand_cost) && cand_cost <= fx_cost + kArmijoC * gd) {
        x_prev = x;
        g_prev = g;
        x = cand;
        fx_cost = cand_cost;
        g = cost_gradient(q0, ref, x);
        accepted = true;
        break;
      }
      step *= kBacktrackFactor;
    }
    if (!accepted) {
      // Step length hit the numerical floor; the iterate is as stationary
      // as the arithmetic allows.
      break;
    }
  }
  if (!report.converged) {
    const Eigen::VectorXd pg = x - project(x - g);
    report.pg_norm = pg.norm();
    report.converged = report.pg_norm <= cfg_.tol;
  }
  report.iterations = iter;
  report.cost = fx_cost;

  warm_start_ = x;
  have_warm_start_ = true;
  return {ForceCommand::from_vec(x.head<4>()), report};
}

}  // namespace slipforge
