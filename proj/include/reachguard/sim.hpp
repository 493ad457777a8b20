#pragma once
// Closed-loop replay of a scenario: belief update, tube, collision set, plan, step.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reachguard/confidence.hpp"
#include "reachguard/family.hpp"
#include "reachguard/safety.hpp"
#include "reachguard/scenario.hpp"
#include "reachguard/tube_cache.hpp"

namespace reachguard {

struct SimStep {
  std::size_t index = 0;
  double time = 0.0;
  ConfidenceBelief belief;
  double beta = 1.0;
  ControlBoundsEndpoints bounds;
  FrtKey key;  // key of the tube that was used
  TubeOrigin tube_origin = TubeOrigin::kSolve;
  std::size_t tube_cells = 0;  // occupied world cells of the position projection
  bool detection = false;
  std::optional<double> hit_time;  // seconds ahead on the nominal trajectory
  PlanCommand command;
  AgentState ego;    // at the start of the step
  AgentState human;  // at the start of the step
  double dist_to_line = 0.0;
  double separation = 0.0;  // minimum over the step's sub-steps
  double brake_time = 0.0;  // time spent decelerating within the step
  // Containment of the realized human states in this step's tube.
  bool containment_checked = false;  // the realized controls stayed inside the bounds
  double containment_value = 0.0;    // largest tube value along the realized path
  bool violation = false;
};

struct SimLog {
  std::string scenario;
  bool use_confidence = true;
  double dt = 0.5;
  double r_col = 4.5;
  double stop_line = 0.0;
  double containment_tolerance = 0.0;
  std::vector<SimStep> steps;
  AgentState final_ego;
  AgentState final_human;
  double final_arc = 0.0;  // ego arc length along the lane at the end
  bool collision = false;
  double min_separation = 0.0;
  std::size_t violations = 0;
};

struct SimMetrics {
  std::optional<double> detection_time;
  std::optional<double> detection_distance;  // to the stop line at first detection
  std::optional<PlanReason> first_brake;
  double braking_duration = 0.0;
  double stop_offset = 0.0;  // final arc length minus the stop line; positive is past the line
  bool stopped = false;
  double min_separation = 0.0;
  bool collision = false;
  std::size_t violations = 0;
};

/// Everything needed to draw one step.
struct SimFrame {
  const Scenario& scenario;
  const SimStep& step;
  const OccupancyGrid2D& k_world;
  const CollisionSet& collision;
  const Trajectory& nominal;
};

struct SimOptions {
  bool use_confidence = true;
  const FrtFamily* family = nullptr;  // queried first when given
  TubeCache* cache = nullptr;         // on-demand solves; a private cache is used when null
  SolverOptions solver;               // margins, order and jobs for on-demand solves
  double world_cell = 0.5;            // collision-set resolution, m
  double nominal_dt = 0.05;           // sampling of the ego's nominal trajectory, s
  std::size_t max_steps = 0;          // stop early after this many steps; 0 runs the whole scenario
  std::function<void(const SimFrame&)> on_frame;
};

/// Runs every macro-step of the scenario. Errors are rethrown with the step and stage.
SimLog run(const Scenario& scenario, const SimOptions& options = {});

SimMetrics metrics(const SimLog& log);

void write_log_json(const std::filesystem::path& path, const SimLog& log, const SimMetrics& m);
void write_log_csv(const std::filesystem::path& path, const SimLog& log);
void write_belief_csv(const std::filesystem::path& path, const SimLog& log);

}  // namespace reachguard
