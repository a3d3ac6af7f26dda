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

#include "slipforge/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "slipforge/errors.hpp"

namespace slipforge {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw ConfigError("csv is missing column '" + name + "'");
}

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i == 0 ? "" : ",") << table.header[i];
  }
  out << "\n";
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ConfigError("csv row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i == 0 ? "" : ",") << format_cell(row[i]);
    }
    out << "\n";
  }
  if (!out) {
    throw ConfigError("write to '" + path + "' failed");
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open csv file '" + path + "'");
  }
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("csv file '" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      table.header.push_back(cell);
    }
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw ConfigError("csv '" + path + "' line " +
                          std::to_string(line_no) + ": bad number '" + cell +
                          "'");
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw ConfigError("csv '" + path + "' line " + std::to_string(line_no) +
                        ": expected " + std::to_string(table.header.size()) +
                        " columns");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable log_to_table(const std::vector<TimedStep>& log) {
  CsvTable t;
  t.header = {"t",       "x",       "y",     "psi",      "xdot",
              "ydot",    "psidot",  "omega_f", "omega_r", "delta",
              "torque_f", "torque_r"};
  t.rows.reserve(log.size());
  for (const TimedStep& s : log) {
    t.rows.push_back({s.t, s.state.x, s.state.y, s.state.psi, s.state.xdot,
                      s.state.ydot, s.state.psidot, s.state.omega_f,
                      s.state.omega_r, s.input.delta, s.input.T_f,
                      s.input.T_r});
  }
  return t;
}

std::vector<TimedStep> table_to_log(const CsvTable& table) {
  const std::size_t ct = table.column("t");
  const std::size_t cx = table.column("x");
  const std::size_t cy = table.column("y");
  const std::size_t cpsi = table.column("psi");
  const std::size_t cxd = table.column("xdot");
  const std::size_t cyd = table.column("ydot");
  const std::size_t cpd = table.column("psidot");
  const std::size_t cof = table.column("omega_f");
  const std::size_t cor = table.column("omega_r");
  const std::size_t cd = table.column("delta");
  const std::size_t ctf = table.column("torque_f");
  const std::size_t ctr = table.column("torque_r");
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
    s.state.omega_f = r[cof];
    s.state.omega_r = r[cor];
    s.input.delta = r[cd];
    s.input.T_f = r[ctf];
    s.input.T_r = r[ctr];
    log.push_back(s);
  }
  return log;
}

}  // namespace slipforge
