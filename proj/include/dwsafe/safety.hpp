#pragma once

#include <span>

#include "dwsafe/types.hpp"

namespace dwsafe {

// Inputs of one safety-distance evaluation. v_r is the true velocity, v_hat
// the measured one (used when the velocity-uncertainty refinement is active),
// a_r the candidate acceleration (used when the actual-acceleration
// refinement is active), r_c the candidate curve radius (used by the
// trajectory-distance disjunct and the clear-distance-ahead check).
struct SafetyQuery {
    SafetyMode mode = SafetyMode::kPassive;
    RefinementSet refinements;
    double v_r = 0.0;
    double a_r = 0.0;
    double v_hat = 0.0;
    double r_c = kStraightRadius;
    double margin_factor = 1.0;  // guard scale for margin mutants; checkers use 1
    const WorldParams* params = nullptr;
};

// Distance needed to brake from v to rest: v^2 / (2 b).
double stopping_distance(double v, double b);

// Distance traveled while driving with acceleration `acc` for `eps` seconds
// and then braking the gained speed away: (acc/b + 1)(acc/2 eps^2 + eps v).
double accel_compensation(double v, double acc, double b, double eps);

// Obstacle room requirement: distance > V^2 / (2 b_o) + tau V.
double obstacle_stop_margin(double v_max, const WorldParams& p);

// The mode's strict lower bound on the infinity-norm distance required to
// permit an accelerating control choice, against an obstacle with speed
// bound v_max.
double safe_distance(const SafetyQuery& q, double v_max);
double safe_distance(const SafetyQuery& q);  // v_max = params->V

// Guard of the accelerating branch for one obstacle: infinity-norm distance
// above the mode's bound, or (trajectory-distance refinement) clearance
// between the obstacle and the candidate circle, or (orientation mode)
// obstacle outside the field of vision. Orientation mode additionally
// requires clear distance ahead.
bool is_safe_curve(const RobotState& robot, const ObstacleState& obstacle, const SafetyQuery& q);

// Clear distance ahead: the robot can stop within the arc still inside its
// observable sector: gamma |r_c| > v^2/(2b) + (A/b+1)(A/2 eps^2 + eps v).
bool cda_ok(double v_r, double r_c, const WorldParams& p);

// The mode's loop invariant over all obstacles, evaluated on true state at a
// control-cycle boundary.
bool loop_invariant(SafetyMode mode, const RefinementSet& refinements, const RobotState& robot,
                    std::span<const ObstacleState> obstacles, const WorldParams& p);

// Largest v >= 0 whose safe distance stays below `distance`; 0 when no
// nonnegative velocity qualifies. The returned value is a supremum: the
// safety predicate is strict, so the root itself is not admissible.
double max_velocity(SafetyMode mode, double distance, const WorldParams& p);

// Witness of the friendly-safety obstacle escape: with the robot stopped, an
// obstacle braking with b_o after at most tau reaction stops short of the
// robot exactly when the obstacle-room margin holds.
bool passive_friendly_obstacle_can_stop(const RobotState& robot, const ObstacleState& obstacle,
                                        const WorldParams& p);

}  // namespace dwsafe
