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


#include "evrmpc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace
{

constexpr double kJoulePerWh = 3600.0;

std::vector<std::string> split_csv(const std::string & line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string & field, const std::string & where)
{
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(field, &used);
  } catch (const std::exception &) {
    throw DataError("cannot parse number '" + field + "' at " + where);
  }
  if (used != field.size() || !std::isfinite(x)) {
    throw DataError("cannot parse number '" + field + "' at " + where);
  }
  return x;
}

void check_grid(const std::vector<double> & g, const char * what)
{
  if (g.empty()) {
    throw DataError(std::string("efficiency map has an empty ") + what + " grid");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || (i > 0 && !(g[i] > g[i - 1]))) {
      throw DataError(std::string("efficiency map ") + what + " grid must be strictly increasing");
    }
  }
}

// Cell index and weight of x on grid g, clamped to the edges.
std::pair<std::size_t, double> locate(const std::vector<double> & g, double x)
{
  if (g.size() == 1 || x <= g.front()) {
    return {0, 0.0};
  }
  if (x >= g.back()) {
    return {g.size() - 2, 1.0};
  }
  const auto it = std::upper_bound(g.begin(), g.end(), x);
  const auto i = static_cast<std::size_t>(it - g.begin()) - 1;
  return {i, (x - g[i]) / (g[i + 1] - g[i])};
}

}  // namespace

EfficiencyMap::EfficiencyMap(
  std::vector<double> force_grid, std::vector<double> speed_grid, Eigen::MatrixXd eta)
: force_(std::move(force_grid)), speed_(std::move(speed_grid)), eta_(std::move(eta))
{
  check_grid(force_, "force");
  check_grid(speed_, "speed");
  if (eta_.rows() != static_cast<Eigen::Index>(force_.size()) ||
      eta_.cols() != static_cast<Eigen::Index>(speed_.size()))
  {
    throw DataError("efficiency map values do not match the grid sizes");
  }
  for (Eigen::Index i = 0; i < eta_.size(); ++i) {
    const double e = eta_.data()[i];
    if (!(e > 0.0 && e <= 1.0)) {
      throw DataError("efficiency values must lie in (0, 1]");
    }
  }
}

EfficiencyMap EfficiencyMap::constant(double eta)
{
  return EfficiencyMap({0.0}, {0.0}, Eigen::MatrixXd::Constant(1, 1, eta));
}

double EfficiencyMap::operator()(double F_w, double v) const
{
  const auto [i, a] = locate(force_, F_w);
  const auto [j, b] = locate(speed_, v);
  const auto i1 = std::min(i + 1, force_.size() - 1);
  const auto j1 = std::min(j + 1, speed_.size() - 1);
  const double lo = (1.0 - b) * eta_(i, j) + b * eta_(i, j1);
  const double hi = (1.0 - b) * eta_(i1, j) + b * eta_(i1, j1);
  return (1.0 - a) * lo + a * hi;
}

EfficiencyMap load_efficiency_map(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open efficiency map '" + path + "'");
  }
  std::string line;
  int lineno = 0;
  std::vector<double> speeds;
  std::vector<double> forces;
  std::vector<std::vector<double>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto fields = split_csv(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (!header) {
      if (fields.size() < 2) {
        throw DataError("efficiency map header needs at least one speed at " + where);
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        speeds.push_back(parse_number(fields[c], where));
      }
      header = true;
      continue;
    }
    if (fields.size() != speeds.size() + 1) {
      throw DataError("efficiency map row has the wrong number of columns at " + where);
    }
    forces.push_back(parse_number(fields[0], where));
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      row.push_back(parse_number(fields[c], where));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw DataError("efficiency map '" + path + "' has no data rows");
  }
  Eigen::MatrixXd eta(rows.size(), speeds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < speeds.size(); ++j) {
      eta(i, j) = rows[i][j];
    }
  }
  return EfficiencyMap(std::move(forces), std::move(speeds), std::move(eta));
}

const char * to_string(EnergyMode mode)
{
  return mode == EnergyMode::physical_power ? "physical" : "paper";
}

EnergyMode parse_energy_mode(const std::string & name)
{
  if (name == "physical" || name == "physical_power") {
    return EnergyMode::physical_power;
  }
  if (name == "paper" || name == "paper_literal") {
    return EnergyMode::paper_literal;
  }
  throw ConfigError("unknown energy mode '" + name + "' (expected physical or paper)");
}

const char * EnergyReport::units() const
{
  return mode == EnergyMode::physical_power ? "Wh" : "N*h";
}

EnergyReport battery_energy(const SimLog & log, const EfficiencyMap & map, EnergyMode mode)
{
  if (log.steps.empty()) {
    throw DataError("cannot evaluate an empty log");
  }
  if (!(log.delta_t > 0.0)) {
    throw DataError("log sampling interval must be positive");
  }
  double traction = 0.0;
  double traction_bat = 0.0;
  double regen_bat = 0.0;
  for (const SimStep & s : log.steps) {
    const double eta = map(s.F_w, s.v);
    // The literal form integrates force rather than power.
    const double flow = mode == EnergyMode::physical_power ? s.F_w * s.v : s.F_w;
    if (s.F_w >= 0.0) {
      traction += flow;
      traction_bat += flow / eta;
    } else {
      regen_bat += -flow * eta;
    }
  }
  EnergyReport r;
  r.mode = mode;
  r.E_mech_Wh = traction * log.delta_t / kJoulePerWh;
  r.E_regen_Wh = regen_bat * log.delta_t / kJoulePerWh;
  r.E_bat_Wh = (traction_bat - regen_bat) * log.delta_t / kJoulePerWh;
  r.j_rms = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double jerk_rms(std::span<const double> v, double delta_t)
{
  if (v.size() < 3) {
    throw DataError("jerk needs at least three speed samples");
  }
  if (!(delta_t > 0.0)) {
    throw DataError("sampling interval must be positive");
  }
  double sum = 0.0;
  for (std::size_t i = 2; i < v.size(); ++i) {
    const double a1 = (v[i] - v[i - 1]) / delta_t;
    const double a0 = (v[i - 1] - v[i - 2]) / delta_t;
    const double j = (a1 - a0) / delta_t;
    sum += j * j;
  }
  return std::sqrt(sum / static_cast<double>(v.size() - 2));
}

double jerk_rms(const SimLog & log)
{
  std::vector<double> v;
  v.reserve(log.steps.size());
  for (const SimStep & s : log.steps) {
    v.push_back(s.v);
  }
  return jerk_rms(v, log.delta_t);
}

EnergyReport evaluate_log(const SimLog & log, const EfficiencyMap & map, EnergyMode mode)
{
  EnergyReport r = battery_energy(log, map, mode);
  if (log.steps.size() >= 3) {
    r.j_rms = jerk_rms(log);
  }
  return r;
}

ReportComparison compare_reports(const EnergyReport & a, const EnergyReport & b)
{
  if (a.mode != b.mode) {
    throw ConfigError("cannot compare reports computed in different energy modes");
  }
  const auto pct = [](double base, double delta) {
    if (base == 0.0) {
      return delta == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    }
    return delta / std::abs(base) * 100.0;
  };
  ReportComparison c;
  c.dE_bat_Wh = b.E_bat_Wh - a.E_bat_Wh;
  c.improvement_pct = pct(a.E_bat_Wh, a.E_bat_Wh - b.E_bat_Wh);
  c.dj_rms = b.j_rms - a.j_rms;
  c.dj_rms_pct = pct(a.j_rms, c.dj_rms);
  c.jerk_ratio = a.j_rms == b.j_rms ? 1.0 : b.j_rms / a.j_rms;
  return c;
}

nlohmann::json to_json(const EnergyReport & r)
{
  nlohmann::json j;
  j["E_bat_Wh"] = r.E_bat_Wh;
  j["E_mech_Wh"] = r.E_mech_Wh;
  j["E_regen_Wh"] = r.E_regen_Wh;
  // NaN has no JSON spelling; a missing jerk is written as null.
  j["j_rms"] = std::isfinite(r.j_rms) ? nlohmann::json(r.j_rms) : nlohmann::json(nullptr);
  j["mode"] = to_string(r.mode);
  j["units"] = r.units();
  return j;
}

EnergyReport report_from_json(const nlohmann::json & j)
{
  try {
    EnergyReport r;
    r.E_bat_Wh = j.at("E_bat_Wh").get<double>();
    r.E_mech_Wh = j.at("E_mech_Wh").get<double>();
    r.E_regen_Wh = j.at("E_regen_Wh").get<double>();
    r.j_rms = j.at("j_rms").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                      : j.at("j_rms").get<double>();
    r.mode = parse_energy_mode(j.at("mode").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("malformed energy report: ") + e.what());
  }
}

void write_report_json(const EnergyReport & report, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write report '" + path + "'");
  }
  out << to_json(report).dump(2) << '\n';
}

}  // namespace evrmpc
