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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>

#include "doctest.h"
#include "oracle_reference_model.hpp"
#include "slipforge/sim_engine.hpp"

using namespace slipforge;

namespace {

const TyreParams kTyre{10.0, 1.9, 1.0};

oracle::Car oracle_car(const VehicleParams& p) {
  return oracle::Car{p.m, p.I_z, p.I_f, p.I_r, p.r_f,
                     p.r_r, p.l_f, p.l_r, p.h,  p.g};
}

// Mid-corner state with moderate slip on both axles.
FullState corner_state(const VehicleParams& p) {
  FullState s;
  s.psi = 0.3;
  const double v = 22.0, beta = 0.02;
  s.xdot = v * std::cos(s.psi + beta);
  s.ydot = v * std::sin(s.psi + beta);
  s.psidot = 0.25;
  s.omega_f = 0.97 * v / p.r_f;
  s.omega_r = 1.02 * v / p.r_r;
  return s;
}

double state_distance(const FullState& a, const FullState& b) {
  double acc = 0.0;
  const auto va = a.to_array(), vb = b.to_array();
  for (int i = 0; i < 8; ++i) {
    const double d = va[i] - vb[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("sim config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt = 0.1;
  cfg.substeps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.substeps = 100;
  cfg.horizon_time = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("one rk4 step matches an independent transcription") {
  const VehicleParams p = VehicleParams::defaults();
  const FullState s0 = corner_state(p);
  const ControlInput u{0.08, 350.0, -150.0};
  const double h = 2e-4;

  const FullState lib = rk4_step(s0, u, h, p, kTyre);

  // Classical RK4 spelled out on the reference derivative.
  const oracle::Car car = oracle_car(p);
  const oracle::Tyre tyre{kTyre.B, kTyre.C, kTyre.D};
  const oracle::InputVec uo{u.delta, u.T_f, u.T_r};
  const oracle::StateVec x0 = s0.to_array();
  const auto axpy = [](const oracle::StateVec& x, double a,
                       const oracle::StateVec& k) {
    oracle::StateVec r{};
    for (int i = 0; i < 8; ++i) r[i] = x[i] + a * k[i];
    return r;
  };
  const oracle::StateVec k1 = oracle::derivative(x0, uo, car, tyre);
  const oracle::StateVec k2 =
      oracle::derivative(axpy(x0, 0.5 * h, k1), uo, car, tyre);
  const oracle::StateVec k3 =
      oracle::derivative(axpy(x0, 0.5 * h, k2), uo, car, tyre);
  const oracle::StateVec k4 = oracle::derivative(axpy(x0, h, k3), uo, car, tyre);
  oracle::StateVec x1{};
  for (int i = 0; i < 8; ++i) {
    x1[i] = x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  const auto lib_arr = lib.to_array();
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(lib_arr[i] - x1[i]) <= 1e-11 * std::max(1.0, std::abs(x1[i])));
  }
}

TEST_CASE("rk4 self convergence under step halving") {
  const VehicleParams p = VehicleParams::defaults();
  const FullState s0 = corner_state(p);
  const ControlInput u{0.06, 250.0, 100.0};
  const double T = 0.1;

  const auto integrate = [&](int n) {
    FullState s = s0;
    const double h = T / n;
    for (int i = 0; i < n; ++i) s = rk4_step(s, u, h, p, kTyre);
    return s;
  };
  const FullState a = integrate(50);
  const FullState b = integrate(100);
  const FullState c = integrate(200);
  const double e1 = state_distance(a, b);
  const double e2 = state_distance(b, c);
  REQUIRE(e2 > 0.0);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.5);
  CHECK(order <= 5.5);
}

TEST_CASE("step interval is refined enough for the wheel dynamics") {
  const VehicleParams p = VehicleParams::defaults();
  const FullState s0 = corner_state(p);
  const ControlInput u{0.05, 300.0, 200.0};
  SimConfig coarse;
  SimConfig fine;
  fine.substeps = 400;
  const FullState sa = step_interval(s0, u, coarse, p, kTyre);
  const FullState sb = step_interval(s0, u, fine, p, kTyre);
  CHECK(state_distance(sa, sb) <= 1e-6);
}

TEST_CASE("model guard failures surface as SimStepError with the substep") {
  const VehicleParams p = VehicleParams::defaults();
  FullState s;
  s.xdot = 20.0;
  s.omega_f = 20.0 / p.r_f;
  s.omega_r = 20.0 / p.r_r;
  // Braking torque far beyond what friction can react locks the rear wheel
  // partway through the interval.
  const ControlInput u{0.0, 0.0, -5000.0};
  SimConfig cfg;
  CHECK_THROWS_AS(step_interval(s, u, cfg, p, kTyre), SimStepError);
  try {
    step_interval(s, u, cfg, p, kTyre);
  } catch (const SimStepError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sub-step") != std::string::npos);
    CHECK(msg.find("wheel") != std::string::npos);
  }
}

TEST_CASE("stiffness jacobian rows that are exactly linear") {
  const VehicleParams p = VehicleParams::defaults();
  const FullState s = corner_state(p);
  const ControlInput u{0.05, 100.0, 100.0};
  const StiffnessReport rep = jacobian(s, u, p, kTyre);
  // First output is psidot, which is itself a state: the row picks out the
  // psidot column exactly even under finite differencing.
  for (int j = 0; j < 6; ++j) {
    const double expect = (j == 3) ? 1.0 : 0.0;
    CHECK(rep.jacobian(0, j) == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(rep.lambda_max_abs > rep.lambda_min_abs);
  CHECK(rep.ratio == doctest::Approx(rep.lambda_max_abs / rep.lambda_min_abs));
}

TEST_CASE("wheel modes dominate the spectrum at speed") {
  const VehicleParams p = VehicleParams::defaults();
  const FullState s = corner_state(p);
  const StiffnessReport rep = jacobian(s, ControlInput{}, p, kTyre);
  // Wheel spin eigenvalues sit in the hundreds of 1/s; body modes are
  // orders of magnitude slower.
  CHECK(rep.lambda_max_abs > 100.0);
  CHECK(rep.ratio > 1e3);
}
