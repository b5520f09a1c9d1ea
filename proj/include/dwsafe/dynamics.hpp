#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwsafe/types.hpp"

namespace dwsafe {

struct FlowResult {
    RobotState post;
    std::optional<double> stopped_at;  // time within the interval when v reached 0
    double elapsed = 0.0;              // evolution time, <= requested duration
};

// Exact evolution of the arc dynamics p' = v d, v' = a, d' = omega d^perp,
// omega' = a / r_c over one control interval. The evolution stops early when
// v reaches 0 (braking stops the robot, it never reverses). Radii at or
// above kStraightRadius integrate as exact straight lines; small rotation
// angles below 1e-6 rad use series forms to avoid cancellation.
//
// Throws std::invalid_argument on dt < 0, r_c == 0, non-unit d, v < 0, or an
// omega0 inconsistent with r_c omega0 = v.
FlowResult flow_robot(const RobotState& pre, double a, double omega0, double r_c, double dt);

// Constant-velocity obstacle motion: p + dt v.
ObstacleState flow_obstacle(const ObstacleState& pre, double dt);

// Refined obstacle: straight-line motion along unit d with linearly changing
// speed, clipped when the speed reaches 0.
ObstacleState flow_refined_obstacle(const ObstacleState& pre, double dt);

// Per-interval checks mirroring the differential invariants of the dynamics:
// time nonnegative, unit orientation, linear speed law, and bounding squares
// for robot and obstacle displacement. `accel` is the effective acceleration
// that drove the interval and `elapsed` its true duration.
struct DiffInvariantReport {
    bool time_ok = true;
    bool orientation_ok = true;
    bool speed_ok = true;
    bool robot_box_ok = true;
    bool obstacle_box_ok = true;
    std::vector<std::string> failures;

    bool all_ok() const {
        return time_ok && orientation_ok && speed_ok && robot_box_ok && obstacle_box_ok;
    }
};

DiffInvariantReport check_differential_invariants(const RobotState& pre, const RobotState& post,
                                                  double accel, double elapsed,
                                                  std::span<const ObstacleState> pre_obstacles,
                                                  std::span<const ObstacleState> post_obstacles);

// Single-obstacle form with an explicit velocity bound.
DiffInvariantReport check_differential_invariants(const RobotState& pre, const RobotState& post,
                                                  double accel, double elapsed, double v_bound,
                                                  const ObstacleState& pre_obstacle,
                                                  const ObstacleState& post_obstacle);

}  // namespace dwsafe
