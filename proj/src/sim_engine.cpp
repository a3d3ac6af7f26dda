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

#include "slipforge/sim_engine.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

namespace slipforge {

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("SimConfig: dt must be positive");
  if (substeps < 1) throw ConfigError("SimConfig: substeps must be >= 1");
  if (!(horizon_time > 0.0)) {
    throw ConfigError("SimConfig: horizon_time must be positive");
  }
}

FullState rk4_step(const FullState& state, const ControlInput& input, double h,
                   const VehicleParams& params, const TyreParams& theta) {
  if (!(h > 0.0)) throw ModelError("rk4_step: step size must be positive");

  const auto eval = [&](const std::array<double, 8>& y) {
    return state_derivative(FullState::from_array(y), input, params, theta)
        .to_array();
  };
  const auto axpy = [](const std::array<double, 8>& y, double a,
                       const std::array<double, 8>& d) {
    std::array<double, 8> out{};
    for (int i = 0; i < 8; ++i) out[i] = y[i] + a * d[i];
    return out;
  };

  const std::array<double, 8> y0 = state.to_array();
  const std::array<double, 8> k1 = eval(y0);
  const std::array<double, 8> k2 = eval(axpy(y0, 0.5 * h, k1));
  const std::array<double, 8> k3 = eval(axpy(y0, 0.5 * h, k2));
  const std::array<double, 8> k4 = eval(axpy(y0, h, k3));

  std::array<double, 8> y1{};
  for (int i = 0; i < 8; ++i) {
    y1[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return FullState::from_array(y1);
}

FullState step_interval(const FullState& state, const ControlInput& input,
                        const SimConfig& cfg, const VehicleParams& params,
                        const TyreParams& theta) {
  cfg.validate();
  const double h = cfg.dt / cfg.substeps;
  FullState current = state;
  for (int i = 0; i < cfg.substeps; ++i) {
    try {
      current = rk4_step(current, input, h, params, theta);
    } catch (const ModelError& e) {
      throw SimStepError("step_interval: sub-step " + std::to_string(i + 1) +
                         "/" + std::to_string(cfg.substeps) + ": " + e.what());
    }
  }
  return current;
}

StiffnessReport jacobian(const FullState& state, const ControlInput& input,
                         const VehicleParams& params, const TyreParams& theta) {
  // z = [psi, xdot, ydot, psidot, omega_f, omega_r]; x and y are held fixed
  // (the dynamics do not depend on them).
  const auto pack = [&](const Eigen::Matrix<double, 6, 1>& z) {
    FullState s = state;
    s.psi = z[0];
    s.xdot = z[1];
    s.ydot = z[2];
    s.psidot = z[3];
    s.omega_f = z[4];
    s.omega_r = z[5];
    return s;
  };
  const auto observe = [&](const FullState& s) {
    const StateDerivative d = state_derivative(s, input, params, theta);
    Eigen::Matrix<double, 6, 1> g;
    g << d.psidot, d.xddot, d.yddot, d.psiddot, d.omega_f_dot, d.omega_r_dot;
    return g;
  };

  Eigen::Matrix<double, 6, 1> z0;
  z0 << state.psi, state.xdot, state.ydot, state.psidot, state.omega_f,
      state.omega_r;

  StiffnessReport report{};
  for (int j = 0; j < 6; ++j) {
    // Mixed units across components need a scaled step.
    const double hj = 1e-5 * std::max(1.0, std::abs(z0[j]));
    Eigen::Matrix<double, 6, 1> zp = z0, zm = z0;
    zp[j] += hj;
    zm[j] -= hj;
    report.jacobian.col(j) =
        (observe(pack(zp)) - observe(pack(zm))) / (2.0 * hj);
  }

  const Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> solver(
      report.jacobian, /*computeEigenvectors=*/false);
  const auto magnitudes = solver.eigenvalues().cwiseAbs();
  report.lambda_max_abs = magnitudes.maxCoeff();
  report.lambda_min_abs = magnitudes.minCoeff();
  report.ratio = report.lambda_max_abs / report.lambda_min_abs;
  return report;
}

}  // namespace slipforge
