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

#include "doctest.h"
#include "slipforge/slip_inversion.hpp"

using namespace slipforge;

namespace {

const TyreParams kTyre{10.0, 1.9, 1.0};
const VehicleParams kCar = VehicleParams::defaults();

double mf(double s, const TyreParams& t) {
  return t.D * std::sin(t.C * std::atan(t.B * s));
}

// Friction force the tyre would generate at the given component slips.
void realized(double s_x, double s_y, double f_z, const TyreParams& t,
              double& f_x, double& f_y) {
  const double s = std::hypot(s_x, s_y);
  if (s < kSlipEps) {
    f_x = f_y = 0.0;
    return;
  }
  const double m = mf(s, t);
  f_x = -(s_x / s) * m * f_z;
  f_y = -(s_y / s) * m * f_z;
}

}  // namespace

TEST_CASE("inversion config validation") {
  InversionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.delta_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.delta_max = 0.6;
  cfg.margin = 0.7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.margin = 0.02;
  cfg.max_iter = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("rear inversion zero demand") {
  InversionConfig cfg;
  const RearSolution s = invert_rear(0.0, 0.0, 20.0, -0.3, 9000.0, kTyre, cfg);
  CHECK(s.s_rx == 0.0);
  CHECK(s.s_ry == 0.0);
}

TEST_CASE("rear inversion pure longitudinal branch round trips") {
  InversionConfig cfg;
  const double f_rz = 9000.0;
  for (double f_rx : {1500.0, -2500.0}) {
    const RearSolution s =
        invert_rear(f_rx, 0.0, 22.0, 0.0, f_rz, kTyre, cfg);
    CHECK(s.s_ry == 0.0);
    double fx = 0.0, fy = 0.0;
    realized(s.s_rx, s.s_ry, f_rz, kTyre, fx, fy);
    CHECK(fx == doctest::Approx(f_rx).epsilon(1e-9));
    CHECK(fy == doctest::Approx(0.0));
  }
}

TEST_CASE("rear inversion direction matching") {
  InversionConfig cfg;
  const double v_rx = 20.0, v_ry = -0.5, f_rz = 9000.0;
  const double f_rx = 300.0, f_ry = 800.0;
  const RearSolution s =
      invert_rear(f_rx, f_ry, v_rx, v_ry, f_rz, kTyre, cfg);
  const double cross = v_rx * f_ry - f_rx * v_ry;
  CHECK(s.s_ry == doctest::Approx(v_ry * f_ry / cross).epsilon(1e-14));
  CHECK(s.s_rx == doctest::Approx(f_rx * v_ry / cross).epsilon(1e-14));

  double fx = 0.0, fy = 0.0;
  realized(s.s_rx, s.s_ry, f_rz, kTyre, fx, fy);
  // The realized force points along the demand to machine precision.
  const double dot = fx * f_rx + fy * f_ry;
  const double cr = fx * f_ry - fy * f_rx;
  CHECK(dot > 0.0);
  CHECK(std::abs(cr) / (std::hypot(fx, fy) * std::hypot(f_rx, f_ry)) <= 1e-6);
}

TEST_CASE("rear inversion friction margin") {
  InversionConfig cfg;
  const double f_rz = 9000.0;
  const double too_much = kTyre.D * (1.0 - cfg.margin) * f_rz * 1.01;
  CHECK_THROWS_AS(
      invert_rear(too_much, 0.0, 20.0, -0.3, f_rz, kTyre, cfg),
      FrictionLimitExceeded);
}

TEST_CASE("rear inversion parallel demand is infeasible") {
  InversionConfig cfg;
  // Demand exactly along the contact velocity ray leaves the cross product
  // at zero; no wheel speed can produce it.
  CHECK_THROWS_AS(
      invert_rear(2000.0, 50.0, 20.0, 0.5, 9000.0, kTyre, cfg),
      InfeasibleDirection);
}

TEST_CASE("front inversion zero demand steers neutrally") {
  InversionConfig cfg;
  const double v = 20.0, beta = 0.02, psidot = 0.3, f_fz = 8500.0;
  const FrontSolution s =
      invert_front(0.0, 0.0, v, beta, psidot, f_fz, kTyre, kCar, cfg);
  const double delta_n = std::atan2(v * std::sin(beta) + psidot * kCar.l_f,
                                    v * std::cos(beta));
  CHECK(s.delta == doctest::Approx(delta_n).epsilon(1e-12));
  CHECK(s.s_fx == 0.0);
  CHECK(s.s_fy == 0.0);
  // At the neutral angle the lateral wheel velocity vanishes.
  const double v_fy_w = v * std::sin(beta - s.delta) +
                        psidot * kCar.l_f * std::cos(s.delta);
  CHECK(std::abs(v_fy_w) <= 1e-12 * v);
}

TEST_CASE("front inversion root satisfies the slip consistency residual") {
  InversionConfig cfg;
  const double v = 22.0, beta = 0.015, psidot = 0.28, f_fz = 8800.0;
  const double f_fx_b = -600.0, f_fy_b = 2800.0;
  const FrontSolution s = invert_front(f_fx_b, f_fy_b, v, beta, psidot, f_fz,
                                       kTyre, kCar, cfg);

  const double demand = std::hypot(f_fx_b, f_fy_b);
  const double s_star = magic_formula_inverse(demand / f_fz, kTyre);
  const double v_fx_b = v * std::cos(beta);
  const double v_fy_b = v * std::sin(beta) + psidot * kCar.l_f;
  const double cross = v_fx_b * f_fy_b - f_fx_b * v_fy_b;
  const double v_fy_w = v * std::sin(beta - s.delta) +
                        psidot * kCar.l_f * std::cos(s.delta);
  const double sgn = cross < 0.0 ? -1.0 : 1.0;
  const double residual =
      (-sgn * v_fy_w) * demand / std::abs(cross) - s_star;
  CHECK(std::abs(residual) <= 1e-8);

  // At the root the slip pair reproduces the rotated demand exactly.
  double fx = 0.0, fy = 0.0;
  realized(s.s_fx, s.s_fy, f_fz, kTyre, fx, fy);
  CHECK(fx == doctest::Approx(s.f_fx_w).epsilon(1e-7));
  CHECK(fy == doctest::Approx(s.f_fy_w).epsilon(1e-7));
  CHECK(std::hypot(s.f_fx_w, s.f_fy_w) == doctest::Approx(demand));
}

TEST_CASE("front inversion margin and missing root") {
  InversionConfig cfg;
  const double f_fz = 8500.0;
  CHECK_THROWS_AS(invert_front(0.0, 0.99 * kTyre.D * f_fz, 20.0, 0.0, 0.0,
                               f_fz, kTyre, kCar, cfg),
                  FrictionLimitExceeded);
  // A strong lateral demand cannot be realized when the steering range is
  // pinned near zero.
  InversionConfig tight = cfg;
  tight.delta_max = 0.01;
  CHECK_THROWS_AS(invert_front(0.0, 5000.0, 20.0, 0.0, 0.0, f_fz, kTyre,
                               kCar, tight),
                  NoRootInBracket);
}

TEST_CASE("torque laws on held and moving targets") {
  const double dt = 0.1;
  // Wheel already on target, no force to sustain: zero torque.
  const double v = 20.0;
  const double omega_free = v / kCar.r_f;
  CHECK(front_torque(0.0, 0.0, v, omega_free, kCar, dt) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // Sustained force term only.
  const double s_fx = 0.03;
  const double omega_target = v / (kCar.r_f * (1.0 + s_fx));
  CHECK(front_torque(400.0, s_fx, v, omega_target, kCar, dt) ==
        doctest::Approx(400.0 * kCar.r_f).epsilon(1e-12));
  // Deadbeat term: reach the target from an offset in one period.
  CHECK(rear_torque(0.0, 0.0, v, v / kCar.r_r - 2.0, kCar, dt) ==
        doctest::Approx(2.0 * kCar.I_r / dt * 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(front_torque(100.0, -1.0, v, omega_free, kCar, dt),
                  TargetSlipAtMinusOne);
  CHECK_THROWS_AS(front_torque(100.0, 0.0, v, omega_free, kCar, 0.0),
                  ConfigError);
}

TEST_CASE("force to input on a coasting state") {
  InversionConfig cfg;
  FullState st;
  st.xdot = 25.0;
  st.omega_f = 25.0 / kCar.r_f;
  st.omega_r = 25.0 / kCar.r_r;
  const auto [input, rep] =
      force_to_input(ForceCommand{}, st, kCar, kTyre, cfg, 0.1);
  CHECK(input.delta == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(input.T_f == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(input.T_r == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.demand_scale == doctest::Approx(1.0));
  // Static load split when no longitudinal force is demanded.
  const double W = kCar.m * kCar.g;
  CHECK(rep.f_fz ==
        doctest::Approx(W * kCar.l_r / (kCar.l_f + kCar.l_r)).epsilon(1e-12));
  CHECK(rep.f_fz + rep.f_rz == doctest::Approx(W).epsilon(1e-12));
}

TEST_CASE("force to input shifts load under longitudinal demand") {
  InversionConfig cfg;
  FullState st;
  st.xdot = 25.0;
  st.omega_f = 25.0 / kCar.r_f;
  st.omega_r = 25.0 / kCar.r_r;
  ForceCommand d;
  d.f_fx_b = 1000.0;
  d.f_rx_b = 2000.0;
  const auto [input, rep] = force_to_input(d, st, kCar, kTyre, cfg, 0.1);
  (void)input;
  const double W = kCar.m * kCar.g;
  const double expect_f =
      (W * kCar.l_r - kCar.h * 3000.0) / (kCar.l_f + kCar.l_r);
  CHECK(rep.f_fz == doctest::Approx(expect_f).epsilon(1e-12));
  CHECK(rep.f_rz == doctest::Approx(W - expect_f).epsilon(1e-12));
  CHECK(rep.demand_scale == doctest::Approx(1.0));
}

TEST_CASE("oversized demand is rescaled into the friction margin") {
  InversionConfig cfg;
  FullState st;
  st.xdot = 25.0;
  st.omega_f = 25.0 / kCar.r_f;
  st.omega_r = 25.0 / kCar.r_r;
  ForceCommand d;
  d.f_fy_b = 20000.0;
  d.f_ry_b = 20000.0;
  const auto [input, rep] = force_to_input(d, st, kCar, kTyre, cfg, 0.1);
  (void)input;
  CHECK(rep.demand_scale < 1.0);
  const double mu_f =
      std::hypot(d.f_fx_b, d.f_fy_b) * rep.demand_scale / rep.f_fz;
  const double mu_r =
      std::hypot(d.f_rx_b, d.f_ry_b) * rep.demand_scale / rep.f_rz;
  CHECK(std::max(mu_f, mu_r) < kTyre.D * (1.0 - cfg.margin));
}

TEST_CASE("actuator clamps are reported") {
  InversionConfig cfg;
  cfg.torque_max = 1.0;
  FullState st;
  st.xdot = 25.0;
  st.omega_f = 25.0 / kCar.r_f;
  // Rear wheel far off its free-rolling rate forces a huge deadbeat torque.
  st.omega_r = 25.0 / kCar.r_r - 10.0;
  ForceCommand d;
  d.f_fx_b = 200.0;
  const auto [input, rep] = force_to_input(d, st, kCar, kTyre, cfg, 0.1);
  CHECK(rep.torque_r_clamped);
  CHECK(std::abs(input.T_r) <= 1.0 + 1e-12);
}

TEST_CASE("force to input needs forward speed") {
  InversionConfig cfg;
  FullState st;
  st.xdot = 0.05;
  CHECK_THROWS_AS(force_to_input(ForceCommand{}, st, kCar, kTyre, cfg, 0.1),
                  SpeedBelowFloor);
}
