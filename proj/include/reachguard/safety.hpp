#pragma once

// Collision sets in the world frame and the ego's braking decision.

#include <optional>
#include <string>

#include "reachguard/dynamics.hpp"
#include "reachguard/occupancy.hpp"

namespace reachguard {

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Rotates the occupied cells of a body-frame grid by pose.theta, translates them by
/// (pose.x, pose.y) and marks every world cell that overlaps a transformed cell. World cell
/// edges lie on anchor + k * cell. The result spans the transformed cells' bounding box.
OccupancyGrid2D world_occupancy(const OccupancyGrid2D& local, const Pose2D& pose,
                                double anchor_x = 0.0, double anchor_y = 0.0);

/// Splits every cell into factor x factor cells with the same occupancy.
OccupancyGrid2D refine(const OccupancyGrid2D& k, int factor);

struct CollisionSet {
  OccupancyGrid2D grid;
  double radius = 0.0;
};

/// Marks every cell whose centre lies within r of an occupied cell centre (exact Euclidean
/// distance transform). The grid grows by ceil(r / cell) cells on each side.
CollisionSet minkowski_dilate(const OccupancyGrid2D& k, double r);

/// Time of the first trajectory sample inside an occupied cell.
std::optional<double> collision_check(const Trajectory& nominal, const CollisionSet& c);

enum class PlanReason { kNominal, kBrakeToLine, kMaxBrake };

const char* to_string(PlanReason reason);

struct PlanCommand {
  double acceleration = 0.0;  // m/s^2
  PlanReason reason = PlanReason::kNominal;

  bool operator==(const PlanCommand&) const = default;
};

/// Stateless decision: nominal without a hit; otherwise brake to the line when the needed
/// deceleration v^2 / (2 d) is within a_max, else brake at a_max.
PlanCommand plan(const AgentState& ego, std::optional<double> hit, double dist_to_line,
                 double a_max);

/// plan() with latching: a braking command is held until the ego stops.
class Planner {
 public:
  explicit Planner(double a_max) : a_max_(a_max) {}

  PlanCommand decide(const AgentState& ego, std::optional<double> hit, double dist_to_line);
  bool latched() const { return latched_.has_value(); }

 private:
  double a_max_;
  std::optional<PlanCommand> latched_;
};

/// Straight lane: position = origin + s * (cos heading, sin heading).
struct Lane {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double heading = 0.0;

  double arc_length(double x, double y) const;
};

/// Constant speed along the lane for `horizon` seconds, sampled every `dt`.
Trajectory nominal_trajectory(const AgentState& ego, const Lane& lane, double horizon, double dt);

/// Advances the ego by dt under a longitudinal command, sub-stepping like the dynamics module.
/// Speed never drops below zero: the applied deceleration is limited to what stops the car.
AgentState step_ego(const AgentState& ego, double acceleration, double dt,
                    double max_substep = kSubStep);

}  // namespace reachguard
