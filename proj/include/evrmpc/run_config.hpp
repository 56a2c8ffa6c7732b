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


#ifndef EVRMPC__RUN_CONFIG_HPP_
#define EVRMPC__RUN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evrmpc/evaluation.hpp"
#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/simulator.hpp"
#include "evrmpc/vehicle_model.hpp"

namespace evrmpc
{

/// Everything needed to reproduce a run. Defaults are the Table-I vehicle,
/// the default envelope and the bundled data files.
struct RunConfig
{
  VehicleParams vehicle;
  DisturbanceEnvelope envelope;  // w_lo / w_hi are derived, never read
  CostWeights weights;
  int horizon = 20;
  std::vector<int> horizons{15, 20, 25, 30, 35};  // sweep only
  Controller controller = Controller::robust;
  DisturbanceMode dist_mode = DisturbanceMode::bounded_random_walk;
  std::uint64_t seed = 0;
  double step_fraction = 0.05;
  std::string replay_path;  // one w per line, replay mode only
  std::string cycle_path = std::string(EVRMPC_DATA_DIR) + "/wltp_medium.csv";
  std::string effmap_path = std::string(EVRMPC_DATA_DIR) + "/effmap_synthetic.csv";
  EnergyMode energy_mode = EnergyMode::physical_power;
  std::string out_dir = "out";
  int steps = -1;  // -1 runs the whole cycle
  bool strict = false;
  double v0 = 0.2778;
  double ds0 = 3.0;
  /// Cruise reference; the resampled cycle mean when unset.
  std::optional<double> v_cruise;
  double solver_tol = 1e-8;
  int max_iterations = 100;
  bool shrink_on_failure = true;
  int retry_budget = -1;

  /// Checks every field against the module preconditions. Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig & config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json & j, RunConfig base = {});
RunConfig load_config(const std::string & path);
void save_config(const RunConfig & config, const std::string & path);

/// Reads one disturbance value per line (blank lines and '#' comments ignored).
std::vector<double> load_replay(const std::string & path);

}  // namespace evrmpc

#endif  // EVRMPC__RUN_CONFIG_HPP_
