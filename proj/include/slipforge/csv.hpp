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

// Minimal numeric CSV with one header line. Values are printed with 17
// significant digits so a written file reloads bit for bit and repeated
// runs diff clean.

#pragma once

#include <string>
#include <vector>

#include "slipforge/tyre_estimator.hpp"

namespace slipforge {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws ConfigError when absent.
  std::size_t column(const std::string& name) const;
};

std::string format_cell(double v);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Transition log round trip: columns t, x, y, psi, xdot, ydot, psidot,
/// omega_f, omega_r, delta, torque_f, torque_r.
CsvTable log_to_table(const std::vector<TimedStep>& log);
std::vector<TimedStep> table_to_log(const CsvTable& table);

}  // namespace slipforge
