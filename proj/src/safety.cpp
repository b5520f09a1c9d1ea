#include "dwsafe/safety.hpp"

#include <cmath>
#include <stdexcept>

namespace dwsafe {

double stopping_distance(double v, double b) {
    if (v < 0.0) throw std::invalid_argument("stopping_distance: v must be >= 0");
    if (b <= 0.0) throw std::invalid_argument("stopping_distance: b must be > 0");
    return v * v / (2.0 * b);
}

double accel_compensation(double v, double acc, double b, double eps) {
    if (b <= 0.0) throw std::invalid_argument("accel_compensation: b must be > 0");
    if (eps <= 0.0) throw std::invalid_argument("accel_compensation: eps must be > 0");
    return (acc / b + 1.0) * (acc / 2.0 * eps * eps + eps * v);
}

double obstacle_stop_margin(double v_max, const WorldParams& p) {
    return v_max * v_max / (2.0 * p.b_o) + p.tau * v_max;
}

double safe_distance(const SafetyQuery& q, double v_max) {
    const WorldParams& p = *q.params;
    const double V = q.mode == SafetyMode::kStatic ? 0.0 : v_max;
    const double b_eff =
        q.refinements.has(Refinement::kActuatorPerturbation) ? p.b * p.Delta_a : p.b;
    const double v = q.refinements.has(Refinement::kVelocityUncertainty) ? q.v_hat + p.Delta_v
                                                                         : q.v_r;
    const bool actual = q.refinements.has(Refinement::kActualAccel);
    const double acc = actual ? q.a_r : p.A;

    double dist;
    if (actual && v + q.a_r * p.eps < 0.0) {
        // Only reachable while decelerating: v >= 0 forces a_r < 0 here.
        if (q.a_r >= 0.0)
            throw std::invalid_argument("safe_distance: negative terminal speed needs a_r < 0");
        dist = -v * v / (2.0 * q.a_r) - V * v / q.a_r;
    } else {
        dist = stopping_distance(v, b_eff) + V * v / b_eff +
               accel_compensation(v + V, acc, b_eff, p.eps);
    }
    if (q.mode == SafetyMode::kPassiveFriendly) dist += obstacle_stop_margin(V, p);
    if (q.refinements.has(Refinement::kLocationUncertainty)) dist += p.Delta_p;
    return dist;
}

double safe_distance(const SafetyQuery& q) { return safe_distance(q, q.params->V); }

bool cda_ok(double v_r, double r_c, const WorldParams& p) {
    if (r_c == 0.0) throw std::invalid_argument("cda_ok: r_c must be nonzero");
    return p.gamma * std::abs(r_c) >
           stopping_distance(v_r, p.b) + accel_compensation(v_r, p.A, p.b, p.eps);
}

namespace {

// Travel available to the obstacle until the robot is stopped, per the
// trajectory-distance disjunct.
double obstacle_travel_bound(const SafetyQuery& q, double v_max) {
    const WorldParams& p = *q.params;
    const double V = q.mode == SafetyMode::kStatic ? 0.0 : v_max;
    const double v = q.refinements.has(Refinement::kVelocityUncertainty) ? q.v_hat + p.Delta_v
                                                                         : q.v_r;
    const double a = q.refinements.has(Refinement::kActualAccel) ? q.a_r : p.A;
    if (v + a * p.eps < 0.0) return -V * v / a;
    return V * (p.eps + (v + a * p.eps) / p.b);
}

}  // namespace

bool is_safe_curve(const RobotState& robot, const ObstacleState& obstacle, const SafetyQuery& q) {
    const WorldParams& p = *q.params;
    if (q.mode == SafetyMode::kPassiveOrientation) {
        if (!cda_ok(q.v_r, q.r_c, p)) return false;
        // Only obstacles inside the field of vision constrain the choice.
        const Vec2 rel = obstacle.p - robot.p;
        const double angle = std::atan2(std::abs(robot.d.cross(rel)), robot.d.dot(rel));
        if (angle > p.gamma / 2.0) return true;
    }
    if (norm_inf(robot.p - obstacle.p) > q.margin_factor * safe_distance(q, obstacle.v_max))
        return true;
    if (q.refinements.has(Refinement::kTrajectoryDistance)) {
        const Vec2 center = robot.p + q.r_c * robot.d.perp();
        const double clearance = std::abs(std::abs(q.r_c) - norm_2(obstacle.p - center));
        if (clearance > q.margin_factor * obstacle_travel_bound(q, obstacle.v_max)) return true;
    }
    return false;
}

bool loop_invariant(SafetyMode mode, const RefinementSet& refinements, const RobotState& robot,
                    std::span<const ObstacleState> obstacles, const WorldParams& p) {
    const double b_eff = refinements.has(Refinement::kActuatorPerturbation) ? p.b * p.Delta_a : p.b;
    const double v = robot.v;
    switch (mode) {
        case SafetyMode::kStatic:
            for (const auto& o : obstacles)
                if (!(norm_inf(robot.p - o.p) > stopping_distance(v, b_eff))) return false;
            return true;
        case SafetyMode::kPassive:
            if (v == 0.0) return true;
            for (const auto& o : obstacles) {
                const double bound = stopping_distance(v, b_eff) + o.v_max * v / b_eff;
                if (norm_inf(robot.p - o.p) > bound) continue;
                if (refinements.has(Refinement::kTrajectoryDistance)) {
                    // Curve-clearance disjunct: while braking the robot stays
                    // on its circle, so the obstacle must not reach it.
                    const double clearance =
                        std::abs(std::abs(robot.r_c) - norm_2(o.p - robot.p_c));
                    if (clearance > o.v_max * v / b_eff) continue;
                }
                return false;
            }
            return true;
        case SafetyMode::kPassiveFriendly:
            if (v == 0.0) return true;
            for (const auto& o : obstacles) {
                const double bound = stopping_distance(v, b_eff) + o.v_max * v / b_eff +
                                     obstacle_stop_margin(o.v_max, p);
                if (!(norm_inf(robot.p - o.p) > bound)) return false;
            }
            return true;
        case SafetyMode::kPassiveOrientation:
            if (v == 0.0) return true;
            if (!(p.gamma * std::abs(robot.r_c) > stopping_distance(v, b_eff))) return false;
            for (const auto& o : obstacles) {
                if (o.visible <= 0.0) continue;
                const double bound = stopping_distance(v, b_eff) + o.v_max * v / b_eff;
                if (!(norm_inf(robot.p - o.p) > bound)) return false;
            }
            return true;
    }
    return false;
}

double max_velocity(SafetyMode mode, double distance, const WorldParams& p) {
    if (distance <= 0.0) throw std::invalid_argument("max_velocity: distance must be > 0");
    const double V = mode == SafetyMode::kStatic ? 0.0 : p.V;
    // safe_distance(v) = v^2/(2b) + (V/b + (A/b+1) eps) v
    //                  + (A/b+1)(A/2 eps^2 + eps V) [+ friendly margin]
    const double c2 = 1.0 / (2.0 * p.b);
    const double c1 = V / p.b + (p.A / p.b + 1.0) * p.eps;
    double c0 = (p.A / p.b + 1.0) * (p.A / 2.0 * p.eps * p.eps + p.eps * V) - distance;
    if (mode == SafetyMode::kPassiveFriendly) c0 += obstacle_stop_margin(V, p);
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return 0.0;
    const double root = (-c1 + std::sqrt(disc)) / (2.0 * c2);
    return root > 0.0 ? root : 0.0;
}

bool passive_friendly_obstacle_can_stop(const RobotState& robot, const ObstacleState& obstacle,
                                        const WorldParams& p) {
    if (robot.v != 0.0)
        throw std::invalid_argument("passive_friendly_obstacle_can_stop: robot must be stopped");
    // The witness run brakes with b_o after at most tau: it travels no more
    // than the obstacle-room margin, so it stops short of the robot exactly
    // when the margin holds.
    return norm_inf(robot.p - obstacle.p) > obstacle_stop_margin(obstacle.v_max, p);
}

}  // namespace dwsafe
