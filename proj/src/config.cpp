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

#include "slipforge/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "slipforge/errors.hpp"

namespace slipforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

double parse_number(const std::string& text, int line_no) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": cannot parse number from '" + t + "'");
  }
  return v;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  const std::string t = trim(raw);
  if (t.empty()) {
    throw ConfigError("line " + std::to_string(line_no) + ": empty value");
  }
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unterminated string");
    }
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") {
    return true;
  }
  if (t == "false") {
    return false;
  }
  if (t.front() == '[') {
    if (t.back() != ']') {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unterminated array");
    }
    std::vector<double> vals;
    std::stringstream ss(t.substr(1, t.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) {
        continue;
      }
      vals.push_back(parse_number(item, line_no));
    }
    return vals;
  }
  return parse_number(t, line_no);
}

}  // namespace

const ConfigValue* ConfigSection::find(const std::string& key) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? nullptr : &it->second;
}

double ConfigSection::number(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) {
    return fallback;
  }
  if (const double* d = std::get_if<double>(v)) {
    return *d;
  }
  throw ConfigError("key '" + key + "' is not a number");
}

double ConfigSection::require_number(const std::string& key) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) {
    throw ConfigError("missing required key '" + key + "'");
  }
  if (const double* d = std::get_if<double>(v)) {
    return *d;
  }
  throw ConfigError("key '" + key + "' is not a number");
}

bool ConfigSection::flag(const std::string& key, bool fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) {
    return fallback;
  }
  if (const bool* b = std::get_if<bool>(v)) {
    return *b;
  }
  throw ConfigError("key '" + key + "' is not a boolean");
}

std::string ConfigSection::text(const std::string& key,
                                const std::string& fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) {
    return fallback;
  }
  if (const std::string* s = std::get_if<std::string>(v)) {
    return *s;
  }
  throw ConfigError("key '" + key + "' is not a string");
}

std::vector<double> ConfigSection::numbers(const std::string& key) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) {
    return {};
  }
  if (const auto* a = std::get_if<std::vector<double>>(v)) {
    return *a;
  }
  throw ConfigError("key '" + key + "' is not an array");
}

const ConfigSection& ConfigDoc::section(const std::string& name) const {
  static const ConfigSection empty;
  const auto it = sections.find(name);
  return it == sections.end() ? empty : it->second;
}

bool ConfigDoc::has_section(const std::string& name) const {
  return sections.count(name) > 0;
}

ConfigDoc parse_config(const std::string& text) {
  ConfigDoc doc;
  ConfigSection* current = nullptr;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) {
      continue;
    }
    if (line.size() >= 4 && line.substr(0, 2) == "[[" &&
        line.substr(line.size() - 2) == "]]") {
      const std::string name = trim(line.substr(2, line.size() - 4));
      if (name.empty()) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": empty table-array name");
      }
      doc.table_arrays[name].emplace_back();
      current = &doc.table_arrays[name].back();
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": empty section name");
      }
      current = &doc.sections[name];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    if (current == nullptr) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    current->set(key, parse_value(line.substr(eq + 1), line_no));
  }
  return doc;
}

ConfigDoc load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

TrialSetup make_trial_setup(const ConfigDoc& doc) {
  TrialSetup setup;

  if (doc.has_section("vehicle")) {
    const ConfigSection& s = doc.section("vehicle");
    const VehicleParams d = VehicleParams::defaults();
    setup.vehicle = VehicleParams(
        s.number("m", d.m), s.number("i_z", d.I_z), s.number("i_f", d.I_f),
        s.number("i_r", d.I_r), s.number("r_f", d.r_f),
        s.number("r_r", d.r_r), s.number("l_f", d.l_f),
        s.number("l_r", d.l_r), s.number("h", d.h), s.number("g", d.g));
  }

  if (doc.has_section("tyre_true")) {
    const ConfigSection& s = doc.section("tyre_true");
    setup.tyre_true = TyreParams(s.number("b", 10.0), s.number("c", 1.9),
                                 s.number("d", 1.0));
  }
  if (doc.has_section("tyre_prior")) {
    const ConfigSection& s = doc.section("tyre_prior");
    setup.theta_prior =
        Vec3{s.number("b", 6.0), s.number("c", 1.5), s.number("d", 0.5)};
  }

  {
    const ConfigSection& s = doc.section("sim");
    setup.sim.dt = s.number("dt", setup.sim.dt);
    setup.sim.substeps =
        static_cast<int>(s.number("substeps", setup.sim.substeps));
    setup.sim.horizon_time = s.number("horizon_time", setup.sim.horizon_time);
    setup.trials.episode.pad_time = s.number("pad_time", 1.0);
    setup.seed = static_cast<unsigned long long>(s.number("seed", 0.0));
    setup.sim.validate();
  }

  {
    const ConfigSection& s = doc.section("mpc");
    setup.mpc.horizon = static_cast<int>(s.number("horizon", 20.0));
    const std::vector<double> q = s.numbers("q");
    if (!q.empty()) {
      if (q.size() != 6) {
        throw ConfigError("mpc q must have exactly 6 entries");
      }
      setup.mpc.Q = Mat6::Zero();
      for (int i = 0; i < 6; ++i) {
        setup.mpc.Q(i, i) = q[static_cast<std::size_t>(i)];
      }
    }
    setup.mpc.R = s.number("r", 1e-8) * Mat4::Identity();
    setup.mpc.max_iters = static_cast<int>(s.number("max_iters", 200.0));
    setup.mpc.tol = s.number("tol", 1e-3);
    setup.trials.bound_scale = s.number("bound_scale", 1.2);
    // The force box itself tracks the estimator's peak factor; only the
    // scale is configurable.
  }

  {
    const ConfigSection& s = doc.section("estimator");
    EstimatorConfig& e = setup.estimator;
    const std::vector<double> lo = s.numbers("lower");
    const std::vector<double> hi = s.numbers("upper");
    if (!lo.empty()) {
      if (lo.size() != 3) {
        throw ConfigError("estimator lower must have exactly 3 entries");
      }
      e.lower = Vec3{lo[0], lo[1], lo[2]};
    }
    if (!hi.empty()) {
      if (hi.size() != 3) {
        throw ConfigError("estimator upper must have exactly 3 entries");
      }
      e.upper = Vec3{hi[0], hi[1], hi[2]};
    }
    e.huber_delta = s.number("huber_delta", e.huber_delta);
    e.lambda_b = s.number("lambda_b", e.lambda_b);
    const std::vector<double> sc = s.numbers("scales");
    if (!sc.empty()) {
      if (sc.size() != 5) {
        throw ConfigError("estimator scales must have exactly 5 entries");
      }
      for (int i = 0; i < 5; ++i) {
        e.scales(i) = sc[static_cast<std::size_t>(i)];
      }
    }
    e.capacity = static_cast<std::size_t>(s.number(
        "capacity", static_cast<double>(e.capacity)));
    e.max_iters = static_cast<int>(s.number("max_iters", e.max_iters));
    e.tol = s.number("tol", e.tol);
    e.validate();
  }

  {
    const ConfigSection& s = doc.section("inversion");
    InversionConfig& i = setup.inversion;
    i.delta_max = s.number("delta_max", i.delta_max);
    i.torque_max = s.number("torque_max", i.torque_max);
    i.f_eps = s.number("f_eps", i.f_eps);
    i.v_lat_eps = s.number("v_lat_eps", i.v_lat_eps);
    i.margin = s.number("margin", i.margin);
    i.residual_tol = s.number("residual_tol", i.residual_tol);
    i.max_iter = static_cast<int>(s.number("max_iter", i.max_iter));
    i.validate();
  }

  if (doc.has_section("course") || doc.table_arrays.count("course.segment")) {
    CourseSpec course;
    course.speed = doc.section("course").number("speed", 25.0);
    const auto it = doc.table_arrays.find("course.segment");
    if (it != doc.table_arrays.end() && !it->second.empty()) {
      for (const ConfigSection& seg : it->second) {
        CourseSegment cs;
        const std::string kind = seg.text("kind", "straight");
        if (kind == "straight") {
          cs.kind = CourseSegment::Kind::Straight;
          cs.length = seg.require_number("length");
        } else if (kind == "arc") {
          cs.kind = CourseSegment::Kind::Arc;
          cs.radius = seg.require_number("radius");
          cs.angle =
              seg.number("angle_deg", 90.0) * std::numbers::pi / 180.0;
        } else {
          throw ConfigError("unknown course segment kind '" + kind + "'");
        }
        course.segments.push_back(cs);
      }
    } else {
      course.segments = CourseSpec::default_course().segments;
    }
    course.validate();
    setup.course = course;
  }

  setup.trials.mpc = setup.mpc;
  setup.trials.episode.sim = setup.sim;
  setup.trials.episode.inversion = setup.inversion;

  if (const char* env = std::getenv("SLIPFORGE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError("SLIPFORGE_SEED must be an unsigned integer");
    }
    setup.seed = v;
  }
  return setup;
}

TrialSetup load_trial_setup(const std::string& path) {
  return make_trial_setup(load_config(path));
}

}  // namespace slipforge
