#pragma once

// Scenario files: ego and human initial states, the human's scripted controls, the
// predictions issued at each macro-step and the safety parameters.

#include <filesystem>
#include <string>
#include <vector>

#include "reachguard/dynamics.hpp"
#include "reachguard/grid.hpp"
#include "reachguard/prediction.hpp"
#include "reachguard/safety.hpp"

namespace reachguard {

struct ScenarioParams {
  double beta_low = 0.2;
  double gamma = 0.1;
  double epsilon = 0.05;
  double r_col = 4.5;     // m
  double a_max = 10.0;    // m/s^2, ego braking limit
  double horizon = 3.0;   // s
  double tube_threshold = 0.0;
};

struct Scenario {
  std::string name;
  double dt = 0.5;
  double duration = 0.0;
  AgentState ego;
  Lane lane;
  double stop_line = 0.0;  // arc length along the lane
  AgentState human;
  std::vector<ControlInput> human_controls;  // one per macro-step
  PredictionScript predictions;
  ScenarioParams params;
  GridSpec grid;  // body-frame tube grid

  std::size_t steps() const;
  /// Throws kScenarioFormat naming the offending field.
  void validate() const;
};

/// Body-frame grid used when a scenario does not give one: 1 m cells in position.
GridSpec default_scenario_grid();

/// Errors carry the JSON pointer of the offending value, e.g. "/human/controls/3/1".
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario.
std::string scenario_to_json(const Scenario& s);

}  // namespace reachguard
