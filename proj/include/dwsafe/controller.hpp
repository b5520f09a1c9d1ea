#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dwsafe/scenario.hpp"
#include "dwsafe/types.hpp"

namespace dwsafe {

// Dynamic-window candidate grid. Accelerations span [-b, A], rotational
// velocities span [-Omega, Omega].
struct CandidateSet {
    std::vector<double> accels;
    std::vector<double> omegas;

    static CandidateSet default_grid(const WorldParams& p, int n_accel = 9, int n_omega = 21);
};

// What the controller sees: robot state with the position replaced by its
// measurement when location uncertainty is active (the velocity field stays
// true: the robot knows when it is stopped), the measured velocity, and the
// obstacle snapshot.
struct Observation {
    RobotState robot;
    double v_hat = 0.0;
    std::span<const ObstacleState> obstacles;
};

// Dynamic-window decision. Brake is always admissible; Stay only at rest;
// Accelerate only when the chosen curve is safe against every observed
// obstacle (and keeps a clear distance ahead under orientation safety).
// Among admissible accelerating candidates the maximum-progress one wins:
// smallest predicted distance to the goal after eps, ties broken by smaller
// |a|, then smaller |omega|, then positive omega. Deterministic.
ControlChoice decide(SafetyMode mode, const RefinementSet& refinements, const Observation& obs,
                     const WorldParams& params, const CandidateSet& candidates,
                     const GoalSpec& goal, double margin_factor = 1.0);

// Straight-lane waypoint controller (1-D). Follows the liveness witness:
// approach at most V_g outside the goal region, brake once inside. When
// `countdown` is provided the deadline variant drives at full acceleration
// while it can still shed speed back to V_g before the region.
ControlChoice waypoint_decide(double p_r, double v_r, const WaypointGoal& goal,
                              const WorldParams& params,
                              std::optional<double> countdown = std::nullopt);

// Intersection crossing controller (robot 1-D on x, obstacle 1-D on y).
// Guard precedence: past the intersection -> (deadline variant:
// obstacle-passed full acceleration) -> pass faster -> pass at constant
// speed -> 1-D passive fallback (accelerate only if able to stop before the
// intersection or the obstacle has passed it).
ControlChoice intersection_decide(double p_r_x, double v_r, double p_o_y, double v_o,
                                  const IntersectionGoal& goal, const WorldParams& params,
                                  bool deadline_variant = false);

// Achievable-deadline conditions.
bool waypoint_deadline_feasible(double p_r, double v_r, const WaypointGoal& goal,
                                const WorldParams& params, double countdown);
bool intersection_deadline_feasible(double p_r_x, const IntersectionGoal& goal,
                                    const WorldParams& params, double deadline);

// True iff the angle between d_r and (p_o - p_r) is at most gamma/2
// (inclusive); a coincident obstacle counts as visible.
bool visibility(const RobotState& robot, const Vec2& p_o, double gamma);

// Guards of the intersection model, exposed for tests and reporting.
struct IntersectionGuards {
    bool after_x = false;
    bool pass_front = false;
    bool pass_behind = false;
    bool pass_const = false;
};
IntersectionGuards intersection_guards(double p_r_x, double v_r, double p_o_y, double v_o,
                                       const IntersectionGoal& goal, const WorldParams& params);

}  // namespace dwsafe
