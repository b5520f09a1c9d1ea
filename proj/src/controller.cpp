#include "dwsafe/controller.hpp"

#include <algorithm>
#include <cmath>

#include "dwsafe/dynamics.hpp"
#include "dwsafe/safety.hpp"

namespace dwsafe {

CandidateSet CandidateSet::default_grid(const WorldParams& p, int n_accel, int n_omega) {
    CandidateSet set;
    set.accels.reserve(n_accel);
    for (int i = 0; i < n_accel; ++i)
        set.accels.push_back(-p.b + (p.A + p.b) * i / (n_accel - 1));
    set.omegas.reserve(n_omega);
    for (int i = 0; i < n_omega; ++i)
        set.omegas.push_back(-p.Omega + 2.0 * p.Omega * i / (n_omega - 1));
    return set;
}

bool visibility(const RobotState& robot, const Vec2& p_o, double gamma) {
    const Vec2 rel = p_o - robot.p;
    if (rel.x == 0.0 && rel.y == 0.0) return true;
    const double angle = std::atan2(std::abs(robot.d.cross(rel)), robot.d.dot(rel));
    return angle <= gamma / 2.0;
}

namespace {

// Progress comparison: higher score, then smaller |a|, then smaller |omega|,
// then positive omega.
bool better(double score, double a, double omega, double best_score, double best_a,
            double best_omega) {
    if (score != best_score) return score > best_score;
    if (std::abs(a) != std::abs(best_a)) return std::abs(a) < std::abs(best_a);
    if (std::abs(omega) != std::abs(best_omega)) return std::abs(omega) < std::abs(best_omega);
    return omega > 0.0 && best_omega <= 0.0;
}

}  // namespace

ControlChoice decide(SafetyMode mode, const RefinementSet& refinements, const Observation& obs,
                     const WorldParams& params, const CandidateSet& candidates,
                     const GoalSpec& goal, double margin_factor) {
    const RobotState& robot = obs.robot;
    const bool at_rest = robot.v == 0.0;
    const bool has_goal = goal.kind == GoalSpec::Kind::kPoint;

    SafetyQuery query;
    query.mode = mode;
    query.refinements = refinements;
    query.v_r = robot.v;
    query.v_hat = obs.v_hat;
    query.margin_factor = margin_factor;
    query.params = &params;

    bool found = false;
    double best_score = 0.0, best_a = 0.0, best_omega = 0.0, best_rc = kStraightRadius;
    double best_omega_phys = 0.0;
    for (double a : candidates.accels) {
        a = std::clamp(a, -params.b, params.A);
        if (at_rest && a <= 0.0) continue;  // no motion; Stay covers it
        query.a_r = a;
        for (double omega : candidates.omegas) {
            omega = std::clamp(omega, -params.Omega, params.Omega);
            double r_c;
            if (omega == 0.0) {
                r_c = kStraightRadius;
            } else if (at_rest) {
                continue;  // spinning in place is out of scope
            } else {
                r_c = robot.v / omega;
            }
            query.r_c = r_c;
            if (mode == SafetyMode::kPassiveOrientation && !cda_ok(robot.v, r_c, params))
                continue;
            bool safe = true;
            for (const ObstacleState& o : obs.obstacles) {
                if (!is_safe_curve(robot, o, query)) {
                    safe = false;
                    break;
                }
            }
            if (!safe) continue;
            // The physical rotational velocity implied by the curve; exact
            // rigid link even for the straight-line representation.
            const double omega_phys = robot.v / r_c;
            double score = 0.0;
            if (has_goal) {
                const FlowResult predicted = flow_robot(robot, a, omega_phys, r_c, params.eps);
                score = -norm_2(predicted.post.p - goal.point);
            }
            if (!found || better(score, a, omega, best_score, best_a, best_omega)) {
                found = true;
                best_score = score;
                best_a = a;
                best_omega = omega;
                best_omega_phys = omega_phys;
                best_rc = r_c;
            }
        }
    }

    if (found) {
        // At rest, accelerating away from the goal loses to staying put.
        if (at_rest && has_goal && best_score <= -norm_2(robot.p - goal.point)) found = false;
    }
    if (found) {
        ControlChoice choice;
        choice.branch = ControlBranch::kAccelerate;
        choice.a = best_a;
        choice.omega = best_omega_phys;
        choice.r_c = best_rc;
        choice.p_c = robot.p + best_rc * robot.d.perp();
        return choice;
    }

    if (at_rest) {
        ControlChoice choice;
        choice.branch = ControlBranch::kStay;
        choice.a = 0.0;
        choice.omega = 0.0;
        choice.r_c = robot.r_c;
        choice.p_c = robot.p_c;
        // Turn in place when the goal lies behind (trajectory-distance model).
        if (refinements.has(Refinement::kTrajectoryDistance) && has_goal &&
            robot.d.dot(goal.point - robot.p) < 0.0) {
            choice.d_flip = true;
            choice.p_c = robot.p + robot.r_c * (-robot.d).perp();
        }
        return choice;
    }

    ControlChoice choice;
    choice.branch = ControlBranch::kBrake;
    choice.a = -params.b;
    choice.omega = robot.omega;  // braking stays on the previous curve
    choice.r_c = robot.r_c;
    choice.p_c = robot.p_c;
    return choice;
}

ControlChoice waypoint_decide(double p_r, double v_r, const WaypointGoal& goal,
                              const WorldParams& p, std::optional<double> countdown) {
    ControlChoice choice;
    choice.omega = 0.0;
    choice.r_c = kStraightRadius;
    const double region_start = goal.p_g - p.Delta_g;
    const bool deadline = countdown.has_value();

    if (p_r >= region_start || (!deadline && v_r > p.V_g)) {
        // Inside (or entering) the region the only remaining choice is to
        // brake until stopped.
        if (v_r == 0.0) {
            choice.branch = ControlBranch::kStay;
            choice.a = 0.0;
        } else {
            choice.branch = ControlBranch::kBrake;
            choice.a = -p.b;
        }
        return choice;
    }

    if (deadline) {
        // Full acceleration while the speed gained can still be shed back to
        // V_g before the region starts.
        const double shed = p_r + (v_r * v_r - p.V_g * p.V_g) / (2.0 * p.b) +
                            accel_compensation(v_r, p.A, p.b, p.eps);
        if (shed <= region_start) {
            choice.branch = ControlBranch::kAccelerate;
            choice.a = p.A;
            return choice;
        }
    }

    // Approach: never exceed V_g within the next cycle.
    choice.branch = ControlBranch::kAccelerate;
    choice.a = std::clamp((p.V_g - v_r) / p.eps, -p.b, p.A);
    return choice;
}

bool waypoint_deadline_feasible(double p_r, double v_r, const WaypointGoal& goal,
                                const WorldParams& p, double countdown) {
    if (!(p.b > 0.0 && p.A > 0.0 && p.eps > 0.0 && p.V_g > 0.0)) return false;
    if (!(v_r == 0.0 && p_r < goal.p_g - p.Delta_g)) return false;
    if (!(p.V_g * p.eps + p.V_g * p.V_g / (2.0 * p.b) < 2.0 * p.Delta_g)) return false;
    const double needed = (p.V_g - v_r) / p.A + (goal.p_g - p.Delta_g - p_r) / p.V_g +
                          p.V_g / p.b + p.eps;
    return countdown > needed;
}

IntersectionGuards intersection_guards(double p_r_x, double v_r, double p_o_y, double v_o,
                                       const IntersectionGoal& goal, const WorldParams& p) {
    IntersectionGuards g;
    g.after_x = p_r_x > goal.p_x.x;
    if (v_r > 0.0) {
        const double t_star = (goal.p_x.x - p_r_x) / v_r;
        g.pass_front = p_o_y + v_o * t_star + p.A * t_star * t_star < goal.p_x.y;
        g.pass_behind = goal.p_x.y < p_o_y + p.V_min * (goal.p_x.x - p_r_x) / (v_r + p.A * p.eps);
        g.pass_const = goal.p_x.y < p_o_y + p.V_min * t_star;
    }
    return g;
}

ControlChoice intersection_decide(double p_r_x, double v_r, double p_o_y, double v_o,
                                  const IntersectionGoal& goal, const WorldParams& p,
                                  bool deadline_variant) {
    ControlChoice choice;
    choice.omega = 0.0;
    choice.r_c = kStraightRadius;
    const IntersectionGuards g = intersection_guards(p_r_x, v_r, p_o_y, v_o, goal, p);
    const bool obstacle_passed = p_o_y > goal.p_x.y;

    auto accelerate = [&choice](double a) {
        choice.branch = ControlBranch::kAccelerate;
        choice.a = a;
        return choice;
    };

    if (g.after_x) return accelerate(p.A);
    if (deadline_variant && obstacle_passed) return accelerate(p.A);
    if (g.pass_front || g.pass_behind) return accelerate(p.A);
    if (g.pass_const) return accelerate(0.0);

    // 1-D passive fallback: accelerate only when the conflict point is
    // permanently clear or still reachable with a full stop in front of it.
    if (obstacle_passed) return accelerate(p.A);
    const double stop_point =
        p_r_x + stopping_distance(v_r, p.b) + accel_compensation(v_r, p.A, p.b, p.eps);
    if (stop_point < goal.p_x.x) return accelerate(p.A);
    if (v_r == 0.0) {
        choice.branch = ControlBranch::kStay;
        choice.a = 0.0;
        return choice;
    }
    choice.branch = ControlBranch::kBrake;
    choice.a = -p.b;
    return choice;
}

bool intersection_deadline_feasible(double p_r_x, const IntersectionGoal& goal,
                                    const WorldParams& p, double deadline) {
    return deadline >= p.eps &&
           goal.p_x.x - p_r_x < p.A / 2.0 * (deadline - p.eps) * (deadline - p.eps);
}

}  // namespace dwsafe
