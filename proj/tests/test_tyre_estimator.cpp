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
#include <random>
#include <vector>

#include "doctest.h"
#include "slipforge/tyre_estimator.hpp"

using namespace slipforge;

namespace {

const VehicleParams kCar = VehicleParams::defaults();

// State with component slips drawn from the informative pre-peak range.
FullState slipping_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  FullState s;
  s.psi = 2.0 * M_PI * (u01(rng) - 0.5);
  const double v = 10.0 + 20.0 * u01(rng);
  const double beta = 0.06 * (u01(rng) - 0.5);
  s.xdot = v * std::cos(s.psi + beta);
  s.ydot = v * std::sin(s.psi + beta);
  s.psidot = 0.6 * (u01(rng) - 0.5);
  const double slip_f = (0.02 + 0.13 * u01(rng)) * (coin(rng) ? 1.0 : -1.0);
  const double slip_r = (0.02 + 0.13 * u01(rng)) * (coin(rng) ? 1.0 : -1.0);
  s.omega_f = v / (kCar.r_f * (1.0 + slip_f));
  s.omega_r = v / (kCar.r_r * (1.0 + slip_r));
  return s;
}

Sample exact_sample(const FullState& s, const ControlInput& u,
                    const Vec3& theta) {
  Sample smp;
  smp.state = s;
  smp.input = u;
  smp.y = predict_y(theta, smp, kCar);
  return smp;
}

}  // namespace

TEST_CASE("samples from a log use exact forward differences") {
  const double dt = 0.1;
  std::vector<TimedStep> log(3);
  for (int i = 0; i < 3; ++i) {
    log[i].t = dt * i;
    log[i].state.xdot = 20.0 + 0.5 * i;
    log[i].state.ydot = -0.2 * i;
    log[i].state.psidot = 0.1 * i;
    log[i].state.omega_f = 60.0 + i;
    log[i].state.omega_r = 61.0 - 2.0 * i;
    log[i].input.delta = 0.01 * i;
  }
  const auto [samples, skipped] = samples_from_log(log, dt);
  REQUIRE(samples.size() == 2);
  CHECK(skipped == 0);
  CHECK(samples[0].y(0) == doctest::Approx(5.0));
  CHECK(samples[0].y(1) == doctest::Approx(-2.0));
  CHECK(samples[0].y(2) == doctest::Approx(1.0));
  CHECK(samples[0].y(3) == doctest::Approx(10.0));
  CHECK(samples[0].y(4) == doctest::Approx(-20.0));
  CHECK(samples[0].input.delta == doctest::Approx(0.0));
  CHECK(samples[1].input.delta == doctest::Approx(0.01));
}

TEST_CASE("samples from a log skip irregular spacing") {
  const double dt = 0.1;
  std::vector<TimedStep> log(4);
  log[0].t = 0.0;
  log[1].t = 0.1;
  log[2].t = 0.35;  // gap from an aborted stretch
  log[3].t = 0.45;
  const auto [samples, skipped] = samples_from_log(log, dt);
  CHECK(samples.size() == 2);
  CHECK(skipped == 1);
  const auto [none, none_skipped] =
      samples_from_log(std::vector<TimedStep>(1), dt);
  CHECK(none.empty());
  CHECK(none_skipped == 0);
}

TEST_CASE("sample buffer drops the oldest entry when full") {
  SampleSet set(3);
  for (int i = 0; i < 5; ++i) {
    Sample s;
    s.y(0) = i;
    set.push(s);
  }
  CHECK(set.size() == 3);
  CHECK(set[0].y(0) == doctest::Approx(2.0));
  CHECK(set[2].y(0) == doctest::Approx(4.0));
}

TEST_CASE("estimator config validation") {
  EstimatorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  EstimatorConfig bad = cfg;
  bad.lower(0) = bad.upper(0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.lower(0) = 0.0;  // outside the admissible stiffness range
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.upper(1) = 5.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.huber_delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.capacity = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("predicted accelerations equal the model derivative") {
  std::mt19937_64 rng(3);
  const Vec3 theta{10.0, 1.9, 1.0};
  const TyreParams tyre{theta(0), theta(1), theta(2)};
  for (int i = 0; i < 20; ++i) {
    const FullState s = slipping_state(rng);
    const ControlInput u{0.03, 150.0, -80.0};
    Sample smp;
    smp.state = s;
    smp.input = u;
    const Vec5 y = predict_y(theta, smp, kCar);
    const StateDerivative d = state_derivative(s, u, kCar, tyre);
    CHECK(y(0) == doctest::Approx(d.xddot).epsilon(1e-14));
    CHECK(y(1) == doctest::Approx(d.yddot).epsilon(1e-14));
    CHECK(y(2) == doctest::Approx(d.psiddot).epsilon(1e-14));
    CHECK(y(3) == doctest::Approx(d.omega_f_dot).epsilon(1e-14));
    CHECK(y(4) == doctest::Approx(d.omega_r_dot).epsilon(1e-14));
  }
}

TEST_CASE("loss decomposes into huber data term and barrier") {
  std::mt19937_64 rng(5);
  const Vec3 theta{10.0, 1.9, 1.0};
  EstimatorConfig cfg;

  double barrier = 0.0;
  for (int j = 0; j < 3; ++j) {
    barrier -= std::log(theta(j) - cfg.lower(j)) +
               std::log(cfg.upper(j) - theta(j));
  }

  // Exact samples carry zero data loss.
  std::vector<Sample> exact;
  for (int i = 0; i < 4; ++i) {
    exact.push_back(
        exact_sample(slipping_state(rng), ControlInput{0.02, 100.0, 50.0},
                     theta));
  }
  CHECK(estimator_loss(theta, exact, cfg, kCar) ==
        doctest::Approx(cfg.lambda_b * barrier).epsilon(1e-12));

  // A known residual in the first component lands in the linear regime:
  // huber(2) = delta * (2 - delta/2) = 1.5 with delta = 1.
  std::vector<Sample> off = exact;
  for (Sample& s : off) s.y(0) += 2.0;
  CHECK(estimator_loss(theta, off, cfg, kCar) ==
        doctest::Approx(1.5 + cfg.lambda_b * barrier).epsilon(1e-12));

  // Quadratic regime: huber(0.5) = 0.125.
  std::vector<Sample> small = exact;
  for (Sample& s : small) s.y(1) -= 0.5;
  CHECK(estimator_loss(theta, small, cfg, kCar) ==
        doctest::Approx(0.125 + cfg.lambda_b * barrier).epsilon(1e-12));

  // Outside the box the barrier is infinite.
  CHECK(std::isinf(estimator_loss(Vec3{0.5, 1.9, 1.0}, exact, cfg, kCar)));
}

TEST_CASE("estimator with no usable samples reports and holds") {
  EstimatorConfig cfg;
  TyreEstimator est(cfg, kCar, Vec3{6.0, 1.5, 0.5});
  const FitReport rep = est.update();
  CHECK(rep.samples_used == 0);
  CHECK_FALSE(rep.converged);
  CHECK(est.theta()(0) == doctest::Approx(6.0));

  // A sample below the speed floor is retained but excluded from the fit.
  Sample stopped;
  stopped.state.xdot = 0.01;
  est.add_sample(stopped);
  const FitReport rep2 = est.update();
  CHECK(rep2.samples_used == 0);
  CHECK(rep2.samples_skipped == 1);
}

TEST_CASE("estimator recovers the generating parameters") {
  std::mt19937_64 rng(9);
  const Vec3 truth{10.0, 1.9, 1.0};
  EstimatorConfig cfg;
  TyreEstimator est(cfg, kCar, Vec3{6.0, 1.5, 0.5});
  for (int i = 0; i < 150; ++i) {
    est.add_sample(
        exact_sample(slipping_state(rng), ControlInput{0.02, 120.0, 90.0},
                     truth));
  }
  const FitReport rep = est.update();
  CHECK(rep.samples_used == 150);
  CHECK(rep.final_loss < rep.initial_loss);
  const Vec3 got = est.theta();
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(got(j) - truth(j)) / truth(j) < 0.10);
  }
}

TEST_CASE("estimator rejects estimates outside the box") {
  EstimatorConfig cfg;
  CHECK_THROWS_AS(TyreEstimator(cfg, kCar, Vec3{0.5, 1.5, 0.5}), ConfigError);
  TyreEstimator est(cfg, kCar, Vec3{6.0, 1.5, 0.5});
  CHECK_THROWS_AS(est.set_theta(Vec3{6.0, 1.5, 2.0}), ConfigError);
}
