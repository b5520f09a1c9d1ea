#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dwsafe/types.hpp"

namespace dwsafe {

enum class ObstaclePolicyKind {
    kRandom,
    kHeadOn,
    kPursuit,
    kRefinedAccel,
    kBlocker,
};

std::string to_string(ObstaclePolicyKind kind);
bool parse_policy(const std::string& text, ObstaclePolicyKind* out);

// 1-D waypoint goal on a straight lane.
struct WaypointGoal {
    double p_g = 0.0;      // waypoint position [m]
    // Delta_g and V_g come from WorldParams.
    std::optional<double> deadline;  // countdown T start [s]; engages the deadline controller
};

// Crossing goal: robot drives along x through p_x, obstacle along y.
struct IntersectionGoal {
    Vec2 p_x;                        // intersection point
    double robot_x0 = 0.0;           // initial robot x
    double robot_v0 = 0.0;           // initial robot speed
    double obstacle_y0 = 0.0;        // initial obstacle y (< p_x.y)
    double obstacle_v0 = 0.0;        // initial obstacle speed, >= V_min
    std::optional<double> deadline;  // deadline D [s]; timer starts at min(0, (p_o - p_x^y)/V_min)
};

struct GoalSpec {
    enum class Kind { kNone, kPoint, kWaypoint, kIntersection };

    Kind kind = Kind::kNone;
    Vec2 point;  // 2-D progress target for the dynamic-window controller
    WaypointGoal waypoint;
    IntersectionGoal intersection;

    static GoalSpec none() { return {}; }
    static GoalSpec toward(Vec2 target) {
        GoalSpec g;
        g.kind = Kind::kPoint;
        g.point = target;
        return g;
    }
};

// Full description of one simulation episode.
struct Scenario {
    WorldParams params;
    SafetyMode mode = SafetyMode::kPassive;
    RefinementSet refinements;
    RobotState robot;
    std::vector<ObstacleState> obstacles;
    ObstaclePolicyKind policy = ObstaclePolicyKind::kRandom;
    double horizon = 30.0;  // [s]
    std::uint64_t seed = 0;
    GoalSpec goal;
    bool random_cycle_time = false;  // sample flow duration in (0, eps] instead of exactly eps
    double margin_factor = 1.0;      // controller guard scale (falsification mutant), in (0, 1]
};

// Empty iff all parameter bounds, state invariants, and the mode's initial
// condition hold. Violations are data, not errors.
std::vector<std::string> validate_scenario(const Scenario& s);

// Key-value scenario file round trip. Parse errors are reported through
// `error`; see README for the schema.
bool load_scenario(const std::string& path, Scenario* out, std::string* error);
bool save_scenario(const Scenario& s, const std::string& path, std::string* error);
Scenario parse_scenario_text(const std::string& text);  // throws std::runtime_error
std::string scenario_to_text(const Scenario& s);

}  // namespace dwsafe
