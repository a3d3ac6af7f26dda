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

#pragma once

#include <stdexcept>
#include <string>

namespace slipforge {

/// Base class for everything the physics can refuse to evaluate.
/// The trial harness catches this to abort an episode cleanly.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpeedBelowFloor : public ModelError {
 public:
  using ModelError::ModelError;
};

class WheelRateBelowFloor : public ModelError {
 public:
  using ModelError::ModelError;
};

class LoadTransferSingularity : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Rethrown by the sub-stepping integrator with the failing sub-step index
/// prepended to the original message.
class SimStepError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Demanded force direction is parallel to the kinematic ray; the slip
/// inversion has no finite solution.
class InfeasibleDirection : public ModelError {
 public:
  using ModelError::ModelError;
};

class FrictionLimitExceeded : public ModelError {
 public:
  using ModelError::ModelError;
};

class NoRootInBracket : public ModelError {
 public:
  using ModelError::ModelError;
};

class TargetSlipAtMinusOne : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Divergent rollout under candidate forces inside the MPC.
class NonFiniteCost : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Bad config file or parameter values outside their documented box.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slipforge
