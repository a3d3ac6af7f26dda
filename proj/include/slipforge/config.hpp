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

// TOML-subset configuration loading: [section] and [[section]] headers,
// key = value lines with numbers, booleans, quoted strings and flat number
// arrays. Unknown keys are ignored so configs can carry annotations.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slipforge/body_mpc.hpp"
#include "slipforge/sim_engine.hpp"
#include "slipforge/slip_inversion.hpp"
#include "slipforge/trial.hpp"
#include "slipforge/tyre_estimator.hpp"
#include "slipforge/vehicle_model.hpp"

namespace slipforge {

using ConfigValue =
    std::variant<double, bool, std::string, std::vector<double>>;

/// One flat key/value table.
class ConfigSection {
 public:
  void set(const std::string& key, ConfigValue v) { kv_[key] = std::move(v); }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  double number(const std::string& key, double fallback) const;
  double require_number(const std::string& key) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;

 private:
  const ConfigValue* find(const std::string& key) const;
  std::map<std::string, ConfigValue> kv_;
};

/// Parsed document: named sections plus ordered arrays of tables.
struct ConfigDoc {
  std::map<std::string, ConfigSection> sections;
  std::map<std::string, std::vector<ConfigSection>> table_arrays;

  const ConfigSection& section(const std::string& name) const;
  bool has_section(const std::string& name) const;
};

ConfigDoc parse_config(const std::string& text);
ConfigDoc load_config(const std::string& path);

/// Everything one experiment needs, assembled from a config document with
/// built-in defaults for absent sections.
struct TrialSetup {
  VehicleParams vehicle = VehicleParams::defaults();
  TyreParams tyre_true{10.0, 1.9, 1.0};
  Vec3 theta_prior{6.0, 1.5, 0.5};
  SimConfig sim;
  MpcConfig mpc;
  EstimatorConfig estimator;
  InversionConfig inversion;
  CourseSpec course = CourseSpec::default_course();
  TrialRunConfig trials;
  unsigned long long seed = 0;
};

/// Builds the setup from a parsed document. The SLIPFORGE_SEED environment
/// variable, when set, overrides the configured seed.
TrialSetup make_trial_setup(const ConfigDoc& doc);
TrialSetup load_trial_setup(const std::string& path);

}  // namespace slipforge
