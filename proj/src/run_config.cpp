// Copyright 2026 The evrmpc Authors
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


#include "evrmpc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace
{

using nlohmann::json;

void require(bool cond, const std::string & msg)
{
  if (!cond) {
    throw ConfigError(msg);
  }
}

void reject_unknown(const json & j, const std::set<std::string> & known, const std::string & where)
{
  require(j.is_object(), where + " must be a JSON object");
  for (const auto & [key, value] : j.items()) {
    require(known.count(key) > 0, "unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json & j, const char * key, T & out)
{
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

}  // namespace

void RunConfig::validate() const
{
  vehicle.validate();
  disturbance_bounds(vehicle, envelope);
  weights.validate();
  require(horizon >= 1, "horizon must be at least 1");
  require(!horizons.empty(), "sweep horizon list must not be empty");
  for (int h : horizons) {
    require(h >= 1, "sweep horizons must be at least 1");
  }
  require(
    std::isfinite(step_fraction) && step_fraction > 0.0 && step_fraction <= 1.0,
    "disturbance step fraction must lie in (0, 1]");
  require(dist_mode != DisturbanceMode::replay || !replay_path.empty(),
    "replay mode needs a replay file");
  require(!cycle_path.empty(), "cycle path must not be empty");
  require(steps == -1 || steps >= 1, "steps must be -1 (whole cycle) or at least 1");
  require(std::isfinite(v0) && v0 >= vehicle.v_min && v0 <= vehicle.v_max,
    "initial speed must lie in [v_min, v_max]");
  require(std::isfinite(ds0), "initial gap must be finite");
  if (v_cruise) {
    require(std::isfinite(*v_cruise) && *v_cruise >= vehicle.v_min && *v_cruise <= vehicle.v_max,
      "cruise speed must lie in [v_min, v_max]");
  }
  require(std::isfinite(solver_tol) && solver_tol > 0.0, "solver tolerance must be positive");
  require(max_iterations >= 1, "solver iteration limit must be at least 1");
  require(retry_budget >= -1, "retry budget must be -1 (unlimited) or non-negative");
}

json to_json(const RunConfig & c)
{
  const VehicleParams & p = c.vehicle;
  const DisturbanceEnvelope & e = c.envelope;
  json j;
  j["vehicle"] = {
    {"m", p.m}, {"g", p.g}, {"f_d_nom", p.f_d_nom}, {"f_r_nom", p.f_r_nom},
    {"delta_t", p.delta_t}, {"F_w_min", p.F_w_min}, {"F_w_max", p.F_w_max},
    {"v_min", p.v_min}, {"v_max", p.v_max}, {"s_0", p.s_0}, {"dt_min", p.dt_min},
    {"dt_max", p.dt_max}};
  j["envelope"] = {
    {"f_d_lo", e.f_d_lo}, {"f_d_hi", e.f_d_hi}, {"f_r_lo", e.f_r_lo}, {"f_r_hi", e.f_r_hi},
    {"theta_lo_rad", e.theta_lo}, {"theta_hi_rad", e.theta_hi}};
  j["weights"] = {{"W1", c.weights.W1}, {"W2_terminal", c.weights.W2_terminal},
                  {"W3", c.weights.W3}};
  j["controller"] = to_string(c.controller);
  j["horizon"] = c.horizon;
  j["horizons"] = c.horizons;
  j["disturbance"] = {
    {"mode", to_string(c.dist_mode)}, {"seed", c.seed}, {"step_fraction", c.step_fraction},
    {"replay_path", c.replay_path}};
  j["cycle_path"] = c.cycle_path;
  j["effmap_path"] = c.effmap_path;
  j["energy_mode"] = to_string(c.energy_mode);
  j["out_dir"] = c.out_dir;
  j["steps"] = c.steps;
  j["strict"] = c.strict;
  j["v0"] = c.v0;
  j["ds0"] = c.ds0;
  j["v_cruise"] = c.v_cruise ? json(*c.v_cruise) : json(nullptr);
  j["solver"] = {
    {"tol", c.solver_tol}, {"max_iterations", c.max_iterations},
    {"shrink_on_failure", c.shrink_on_failure}, {"retry_budget", c.retry_budget}};
  return j;
}

RunConfig config_from_json(const json & j, RunConfig c)
{
  try {
    reject_unknown(j,
      {"vehicle", "envelope", "weights", "controller", "horizon", "horizons", "disturbance",
       "cycle_path", "effmap_path", "energy_mode", "out_dir", "steps", "strict", "v0", "ds0",
       "v_cruise", "solver"},
      "config");
    if (j.contains("vehicle")) {
      const json & v = j.at("vehicle");
      reject_unknown(v,
        {"m", "g", "f_d_nom", "f_r_nom", "delta_t", "F_w_min", "F_w_max", "v_min", "v_max", "s_0",
         "dt_min", "dt_max"},
        "vehicle");
      VehicleParams & p = c.vehicle;
      read(v, "m", p.m);
      read(v, "g", p.g);
      read(v, "f_d_nom", p.f_d_nom);
      read(v, "f_r_nom", p.f_r_nom);
      read(v, "delta_t", p.delta_t);
      read(v, "F_w_min", p.F_w_min);
      read(v, "F_w_max", p.F_w_max);
      read(v, "v_min", p.v_min);
      read(v, "v_max", p.v_max);
      read(v, "s_0", p.s_0);
      read(v, "dt_min", p.dt_min);
      read(v, "dt_max", p.dt_max);
    }
    if (j.contains("envelope")) {
      const json & v = j.at("envelope");
      reject_unknown(v,
        {"f_d_lo", "f_d_hi", "f_r_lo", "f_r_hi", "theta_lo_rad", "theta_hi_rad"}, "envelope");
      DisturbanceEnvelope & e = c.envelope;
      read(v, "f_d_lo", e.f_d_lo);
      read(v, "f_d_hi", e.f_d_hi);
      read(v, "f_r_lo", e.f_r_lo);
      read(v, "f_r_hi", e.f_r_hi);
      read(v, "theta_lo_rad", e.theta_lo);
      read(v, "theta_hi_rad", e.theta_hi);
    }
    if (j.contains("weights")) {
      const json & v = j.at("weights");
      reject_unknown(v, {"W1", "W2_terminal", "W3"}, "weights");
      read(v, "W1", c.weights.W1);
      read(v, "W2_terminal", c.weights.W2_terminal);
      read(v, "W3", c.weights.W3);
    }
    if (j.contains("controller")) {
      c.controller = parse_controller(j.at("controller").get<std::string>());
    }
    read(j, "horizon", c.horizon);
    read(j, "horizons", c.horizons);
    if (j.contains("disturbance")) {
      const json & v = j.at("disturbance");
      reject_unknown(v, {"mode", "seed", "step_fraction", "replay_path"}, "disturbance");
      if (v.contains("mode")) {
        c.dist_mode = parse_disturbance_mode(v.at("mode").get<std::string>());
      }
      read(v, "seed", c.seed);
      read(v, "step_fraction", c.step_fraction);
      read(v, "replay_path", c.replay_path);
    }
    read(j, "cycle_path", c.cycle_path);
    read(j, "effmap_path", c.effmap_path);
    if (j.contains("energy_mode")) {
      c.energy_mode = parse_energy_mode(j.at("energy_mode").get<std::string>());
    }
    read(j, "out_dir", c.out_dir);
    read(j, "steps", c.steps);
    read(j, "strict", c.strict);
    read(j, "v0", c.v0);
    read(j, "ds0", c.ds0);
    if (j.contains("v_cruise")) {
      const json & v = j.at("v_cruise");
      c.v_cruise = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    if (j.contains("solver")) {
      const json & v = j.at("solver");
      reject_unknown(v, {"tol", "max_iterations", "shrink_on_failure", "retry_budget"}, "solver");
      read(v, "tol", c.solver_tol);
      read(v, "max_iterations", c.max_iterations);
      read(v, "shrink_on_failure", c.shrink_on_failure);
      read(v, "retry_budget", c.retry_budget);
    }
  } catch (const json::exception & e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception & e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RunConfig & config, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write config '" + path + "'");
  }
  out << to_json(config).dump(2) << '\n';
}

std::vector<double> load_replay(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open replay file '" + path + "'");
  }
  std::vector<double> w;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const auto b = line.find_first_not_of(" \t\r,");
    if (b == std::string::npos) {
      continue;
    }
    const auto e = line.find_last_not_of(" \t\r,");
    const std::string field = line.substr(b, e - b + 1);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(field, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != field.size() || !std::isfinite(x)) {
      throw DataError("cannot parse disturbance at " + path + ":" + std::to_string(lineno));
    }
    w.push_back(x);
  }
  if (w.empty()) {
    throw DataError("replay file '" + path + "' is empty");
  }
  return w;
}

}  // namespace evrmpc
