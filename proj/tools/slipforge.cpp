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

// Command-line front end: reference generation, open-loop simulation, the
// iterated tracking experiment, batch estimation and the stiffness
// diagnostic, all driven by one TOML config.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "slipforge/config.hpp"
#include "slipforge/csv.hpp"
#include "slipforge/errors.hpp"
#include "slipforge/sim_engine.hpp"
#include "slipforge/trial.hpp"
#include "slipforge/tyre_estimator.hpp"

namespace {

using namespace slipforge;

CsvTable reference_table(const ReferenceTrajectory& ref) {
  CsvTable t;
  t.header = {"t", "x", "y", "psi", "xdot", "ydot", "psidot"};
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const BodyState& b = ref.samples[k];
    t.rows.push_back({ref.dt * static_cast<double>(k), b.x, b.y, b.psi,
                      b.xdot, b.ydot, b.psidot});
  }
  return t;
}

int cmd_gen_ref(const std::string& config_path, double dt_override,
                const std::string& out) {
  TrialSetup setup = load_trial_setup(config_path);
  const double dt = dt_override > 0.0 ? dt_override : setup.sim.dt;
  const ReferenceTrajectory ref = generate_reference(setup.course, dt);
  write_csv(out, reference_table(ref));
  std::cout << "wrote " << ref.size() << " reference samples to " << out
            << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& inputs,
                 const std::string& out) {
  TrialSetup setup = load_trial_setup(config_path);
  const CsvTable in = read_csv(inputs);
  const std::size_t ct = in.column("t");
  const std::size_t cd = in.column("delta");
  const std::size_t cf = in.column("torque_f");
  const std::size_t cr = in.column("torque_r");

  const ReferenceTrajectory ref = generate_reference(setup.course,
                                                     setup.sim.dt);
  FullState state = initial_state(ref, setup.vehicle);

  std::vector<TimedStep> log;
  log.reserve(in.rows.size() + 1);
  double t = 0.0;
  for (const std::vector<double>& row : in.rows) {
    t = row[ct];
    const ControlInput u{row[cd], row[cf], row[cr]};
    log.push_back(TimedStep{t, state, u});
    state = step_interval(state, u, setup.sim, setup.vehicle,
                          setup.tyre_true);
  }
  log.push_back(TimedStep{t + setup.sim.dt, state, ControlInput{}});
  write_csv(out, log_to_table(log));
  std::cout << "simulated " << in.rows.size() << " steps into " << out
            << "\n";
  return 0;
}

int cmd_track(const std::string& config_path, int trials_override,
              const std::string& out_dir, std::optional<int> switch_trial,
              std::optional<double> sw_b, std::optional<double> sw_c,
              std::optional<double> sw_d) {
  TrialSetup setup = load_trial_setup(config_path);
  if (trials_override > 0) {
    setup.trials.num_trials = trials_override;
  }
  if (switch_trial.has_value()) {
    setup.trials.switch_trial = *switch_trial;
    setup.trials.switch_tyre =
        TyreParams(sw_b.value_or(setup.tyre_true.B),
                   sw_c.value_or(setup.tyre_true.C),
                   sw_d.value_or(setup.tyre_true.D));
  }

  std::filesystem::create_directories(out_dir);
  const ReferenceTrajectory ref = generate_reference(setup.course,
                                                     setup.sim.dt);
  write_csv(out_dir + "/reference.csv", reference_table(ref));

  TyreEstimator estimator(setup.estimator, setup.vehicle, setup.theta_prior);

  CsvTable metrics;
  metrics.header = {"trial", "mse", "b", "c", "d"};
  TrialObserver observer;
  observer.on_trial = [&](const TrialResult& r, const EpisodeResult& ep) {
    write_csv(out_dir + "/traj_" + std::to_string(r.trial) + ".csv",
              log_to_table(ep.log));
    metrics.rows.push_back({static_cast<double>(r.trial), r.mse,
                            r.theta_after(0), r.theta_after(1),
                            r.theta_after(2)});
    std::cout << "trial " << r.trial << ": mse " << r.mse << " m^2, theta ("
              << r.theta_after(0) << ", " << r.theta_after(1) << ", "
              << r.theta_after(2) << ")"
              << (r.aborted ? " [aborted: " + r.abort_reason + "]" : "")
              << "\n";
  };

  const std::vector<TrialResult> results = run_trials(
      ref, setup.vehicle, setup.tyre_true, estimator, setup.trials, observer);
  write_csv(out_dir + "/metrics.csv", metrics);

  const TrialResult& last = results.back();
  std::cout << "final: mse " << last.mse << " m^2 after "
            << results.size() << " trials (seed " << setup.seed << ")\n";
  return 0;
}

int cmd_estimate(const std::string& config_path, const std::string& data,
                 const std::string& out) {
  TrialSetup setup = load_trial_setup(config_path);
  const std::vector<TimedStep> log = table_to_log(read_csv(data));

  TyreEstimator estimator(setup.estimator, setup.vehicle, setup.theta_prior);
  estimator.add_log(log, setup.sim.dt);
  const FitReport report = estimator.update();
  const Vec3& th = estimator.theta();

  std::cout << "fitted (b, c, d) = (" << th(0) << ", " << th(1) << ", "
            << th(2) << ")\n"
            << "loss " << report.initial_loss << " -> " << report.final_loss
            << " in " << report.iterations << " iterations, |grad| "
            << report.grad_norm << ", " << report.samples_used
            << " samples used, " << report.samples_skipped << " skipped\n";
  if (!out.empty()) {
    CsvTable t;
    t.header = {"b", "c", "d", "final_loss", "iterations", "samples_used"};
    t.rows.push_back({th(0), th(1), th(2), report.final_loss,
                      static_cast<double>(report.iterations),
                      static_cast<double>(report.samples_used)});
    write_csv(out, t);
  }
  return 0;
}

// Accepts either a closed-loop transition log or a bare reference CSV; the
// latter is completed with free-rolling wheels and zero input.
std::vector<TimedStep> stiffness_states(const CsvTable& table,
                                        const VehicleParams& params) {
  bool has_wheels = true;
  try {
    table.column("omega_f");
  } catch (const ConfigError&) {
    has_wheels = false;
  }
  if (has_wheels) {
    return table_to_log(table);
  }
  const std::size_t ct = table.column("t");
  const std::size_t cx = table.column("x");
  const std::size_t cy = table.column("y");
  const std::size_t cpsi = table.column("psi");
  const std::size_t cxd = table.column("xdot");
  const std::size_t cyd = table.column("ydot");
  const std::size_t cpd = table.column("psidot");
  std::vector<TimedStep> log;
  log.reserve(table.rows.size());
  for (const std::vector<double>& r : table.rows) {
    TimedStep s;
    s.t = r[ct];
    s.state.x = r[cx];
    s.state.y = r[cy];
    s.state.psi = r[cpsi];
    s.state.xdot = r[cxd];
    s.state.ydot = r[cyd];
    s.state.psidot = r[cpd];
    const double v = std::hypot(s.state.xdot, s.state.ydot);
    const double beta =
        wrap_to_pi(std::atan2(s.state.ydot, s.state.xdot) - s.state.psi);
    s.state.omega_f = v * std::cos(beta) / params.r_f;
    s.state.omega_r = v * std::cos(beta) / params.r_r;
    s.input = ControlInput{};
    log.push_back(s);
  }
  return log;
}

int cmd_stiffness(const std::string& config_path, const std::string& traj,
                  const std::string& out) {
  TrialSetup setup = load_trial_setup(config_path);
  const std::vector<TimedStep> log =
      stiffness_states(read_csv(traj), setup.vehicle);

  CsvTable t;
  t.header = {"index", "lambda_max_abs", "lambda_min_abs", "ratio"};
  double worst = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    try {
      const StiffnessReport rep = jacobian(log[i].state, log[i].input,
                                           setup.vehicle, setup.tyre_true);
      t.rows.push_back({static_cast<double>(i), rep.lambda_max_abs,
                        rep.lambda_min_abs, rep.ratio});
      worst = std::max(worst, std::isfinite(rep.ratio) ? rep.ratio : worst);
    } catch (const ModelError&) {
      // Rows outside the model floors are skipped rather than faked.
    }
  }
  write_csv(out, t);
  std::cout << "stiffness rows " << t.rows.size() << ", largest finite ratio "
            << worst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle dynamics and two-timescale control toolkit"};
  app.require_subcommand(1);

  std::string config_path = "configs/default.toml";
  std::string out, inputs, data, traj, out_dir;
  double dt_override = 0.0;
  int trials = 0;
  std::optional<int> switch_trial;
  std::optional<double> sw_b, sw_c, sw_d;

  CLI::App* gen = app.add_subcommand("gen-ref",
                                     "Write the reference trajectory CSV");
  gen->add_option("--config", config_path, "TOML config path");
  gen->add_option("--dt", dt_override, "Override the sample spacing [s]");
  gen->add_option("--out", out, "Output CSV path")->required();

  CLI::App* sim = app.add_subcommand(
      "simulate", "Open-loop rollout of an input schedule CSV");
  sim->add_option("--config", config_path, "TOML config path");
  sim->add_option("--inputs", inputs, "CSV with t, delta, torque_f, torque_r")
      ->required();
  sim->add_option("--out", out, "Transition log CSV path")->required();

  CLI::App* track = app.add_subcommand(
      "track", "Iterated tracking experiment with refitting between trials");
  track->add_option("--config", config_path, "TOML config path");
  track->add_option("--trials", trials, "Number of trials");
  track->add_option("--out-dir", out_dir, "Directory for logs and metrics")
      ->required();
  track->add_option("--switch-trial", switch_trial,
                    "Trial index at which the true tyre changes");
  track->add_option("--switch-b", sw_b, "Post-switch stiffness factor");
  track->add_option("--switch-c", sw_c, "Post-switch shape factor");
  track->add_option("--switch-d", sw_d, "Post-switch peak factor");

  CLI::App* est = app.add_subcommand(
      "estimate", "Fit friction parameters to a transition log");
  est->add_option("--config", config_path, "TOML config path");
  est->add_option("--data", data, "Transition log CSV")->required();
  est->add_option("--out", out, "Optional CSV for the fitted parameters");

  CLI::App* stiff = app.add_subcommand(
      "stiffness", "Eigenvalue-spread diagnostic along a transition log");
  stiff->add_option("--config", config_path, "TOML config path");
  stiff->add_option("--traj,--ref", traj, "Transition log CSV")->required();
  stiff->add_option("--out", out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen_ref(config_path, dt_override, out);
    }
    if (sim->parsed()) {
      return cmd_simulate(config_path, inputs, out);
    }
    if (track->parsed()) {
      return cmd_track(config_path, trials, out_dir, switch_trial, sw_b, sw_c,
                       sw_d);
    }
    if (est->parsed()) {
      return cmd_estimate(config_path, data, out);
    }
    if (stiff->parsed()) {
      return cmd_stiffness(config_path, traj, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
