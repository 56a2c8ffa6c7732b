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


#ifndef EVRMPC__EVALUATION_HPP_
#define EVRMPC__EVALUATION_HPP_

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evrmpc/simulator.hpp"
#include "evrmpc/vehicle_model.hpp"

namespace evrmpc
{

/// Powertrain efficiency over (wheel force, speed), bilinear between nodes and
/// clamped to the nearest edge outside the grid.
class EfficiencyMap
{
public:
  EfficiencyMap(std::vector<double> force_grid, std::vector<double> speed_grid, Eigen::MatrixXd eta);

  /// Map with the same efficiency everywhere.
  static EfficiencyMap constant(double eta);

  double operator()(double F_w, double v) const;

  const std::vector<double> & force_grid() const { return force_; }
  const std::vector<double> & speed_grid() const { return speed_; }
  const Eigen::MatrixXd & values() const { return eta_; }

private:
  std::vector<double> force_;
  std::vector<double> speed_;
  Eigen::MatrixXd eta_;  // rows follow force_, columns follow speed_
};

/// Reads the CSV layout: header row `<label>,v_0,v_1,...`, then one row per
/// force node `F_i,eta_i0,eta_i1,...`. Throws DataError.
EfficiencyMap load_efficiency_map(const std::string & path);

enum class EnergyMode { physical_power, paper_literal };

const char * to_string(EnergyMode mode);
/// Accepts physical, paper and the long names.
EnergyMode parse_energy_mode(const std::string & name);

struct EnergyReport
{
  double E_bat_Wh = 0.0;   // net battery energy
  double E_mech_Wh = 0.0;  // traction energy delivered at the wheels
  double E_regen_Wh = 0.0; // energy returned to the battery, as a magnitude
  double j_rms = 0.0;      // [m/s^3], NaN when the log is too short
  EnergyMode mode = EnergyMode::physical_power;

  /// Unit of the three energy fields. The literal mode integrates force over
  /// time, so its "Wh" fields hold N*s/3600.
  const char * units() const;
};

/// Integrates battery power over the logged steps, using the applied F_w and
/// the speed at the start of each step. Throws DataError on an empty log.
EnergyReport battery_energy(
  const SimLog & log, const EfficiencyMap & map, EnergyMode mode = EnergyMode::physical_power);

/// RMS of the backward second difference of the logged speeds. Needs at least
/// three samples; throws DataError otherwise.
double jerk_rms(std::span<const double> v, double delta_t);
double jerk_rms(const SimLog & log);

/// Energy report plus jerk; j_rms is NaN for logs shorter than three steps.
EnergyReport evaluate_log(
  const SimLog & log, const EfficiencyMap & map, EnergyMode mode = EnergyMode::physical_power);

/// Deltas of candidate `b` against baseline `a`.
struct ReportComparison
{
  double dE_bat_Wh = 0.0;        // b - a
  double improvement_pct = 0.0;  // (a - b) / a * 100, positive when b uses less
  double dj_rms = 0.0;           // b - a
  double dj_rms_pct = 0.0;       // (b - a) / a * 100
  double jerk_ratio = 0.0;       // b / a
};

/// Throws ConfigError when the modes differ.
ReportComparison compare_reports(const EnergyReport & a, const EnergyReport & b);

nlohmann::json to_json(const EnergyReport & report);
EnergyReport report_from_json(const nlohmann::json & j);
void write_report_json(const EnergyReport & report, const std::string & path);

}  // namespace evrmpc

#endif  // EVRMPC__EVALUATION_HPP_
