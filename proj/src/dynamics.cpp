#include "dwsafe/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dwsafe {

namespace {

// Chord of a circular arc of length s on a signed radius r_c, decomposed
// along the entry direction and its perpendicular. Series forms below 1e-6
// rad avoid the cancellation in r_c (1 - cos theta).
void arc_chord(double s, double r_c, double theta, double* along, double* side) {
    if (std::abs(theta) >= 1e-6) {
        *along = r_c * std::sin(theta);
        *side = r_c * (1.0 - std::cos(theta));
    } else {
        const double t2 = theta * theta;
        *along = s * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0));
        *side = s * theta / 2.0 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0));
    }
}

}  // namespace

FlowResult flow_robot(const RobotState& pre, double a, double omega0, double r_c, double dt) {
    if (dt < 0.0) throw std::invalid_argument("flow_robot: dt must be >= 0");
    if (r_c == 0.0) throw std::invalid_argument("flow_robot: r_c must be nonzero");
    if (pre.v < 0.0) throw std::invalid_argument("flow_robot: v must be >= 0");
    if (std::abs(norm_2(pre.d) - 1.0) > kGeomTol)
        throw std::invalid_argument("flow_robot: d must be a unit vector");
    if (std::abs(omega0 * r_c - pre.v) > 1e-9 * std::max(1.0, std::abs(pre.v)))
        throw std::invalid_argument("flow_robot: omega0 inconsistent with r_c omega0 = v");

    FlowResult result;
    result.post = pre;
    result.post.a = a;
    result.post.r_c = r_c;

    // Braking at rest holds the robot; time passes but nothing moves.
    if (pre.v == 0.0 && a < 0.0) {
        result.post.omega = 0.0;
        result.post.t = pre.t + dt;
        result.post.p_c = result.post.curve_center();
        result.stopped_at = 0.0;
        result.elapsed = dt;
        return result;
    }

    double T = dt;
    if (a < 0.0 && pre.v + a * dt < 0.0) {
        T = -pre.v / a;
        result.stopped_at = T;
    }

    const double s = pre.v * T + 0.5 * a * T * T;
    const bool straight = std::abs(r_c) >= kStraightRadius;
    const double theta = straight ? 0.0 : s / r_c;

    if (straight) {
        result.post.p = pre.p + s * pre.d;
    } else {
        double along = 0.0, side = 0.0;
        arc_chord(s, r_c, theta, &along, &side);
        result.post.p = pre.p + along * pre.d + side * pre.d.perp();
        result.post.d = rotated(pre.d, theta);
    }
    result.post.v = result.stopped_at ? 0.0 : pre.v + a * T;
    result.post.omega = result.post.v / r_c;
    result.post.p_c = result.post.curve_center();
    result.post.beta = pre.beta + theta;
    result.post.t = pre.t + T;
    result.elapsed = T;
    return result;
}

ObstacleState flow_obstacle(const ObstacleState& pre, double dt) {
    if (dt < 0.0) throw std::invalid_argument("flow_obstacle: dt must be >= 0");
    ObstacleState post = pre;
    post.p = pre.p + dt * pre.v;
    return post;
}

ObstacleState flow_refined_obstacle(const ObstacleState& pre, double dt) {
    if (dt < 0.0) throw std::invalid_argument("flow_refined_obstacle: dt must be >= 0");
    if (std::abs(norm_2(pre.d) - 1.0) > kGeomTol)
        throw std::invalid_argument("flow_refined_obstacle: d must be a unit vector");
    const double speed = pre.speed();
    double T = dt;
    bool stopped = false;
    if (pre.a < 0.0 && speed + pre.a * dt < 0.0) {
        T = -speed / pre.a;
        stopped = true;
    }
    ObstacleState post = pre;
    post.p = pre.p + (speed * T + 0.5 * pre.a * T * T) * pre.d;
    const double new_speed = stopped ? 0.0 : speed + pre.a * T;
    post.v = new_speed * pre.d;
    return post;
}

namespace {

DiffInvariantReport check_impl(const RobotState& pre, const RobotState& post, double accel,
                               double elapsed, std::span<const ObstacleState> pre_obstacles,
                               std::span<const ObstacleState> post_obstacles,
                               const double* v_bound_override) {
    DiffInvariantReport report;
    const double t = elapsed;
    if (t < 0.0) {
        report.time_ok = false;
        report.failures.push_back("elapsed time is negative");
    }
    if (std::abs(norm_2(post.d) - 1.0) > kGeomTol) {
        report.orientation_ok = false;
        report.failures.push_back("orientation norm drifted from 1");
    }
    if (std::abs(post.v - (pre.v + accel * t)) > 1e-12 * std::max(1.0, std::abs(pre.v))) {
        report.speed_ok = false;
        report.failures.push_back("v != v0 + a t");
    }
    // Bounding square: |dp| <= t (v_post - a t / 2) componentwise, which is
    // the arc length driven over the interval.
    const double robot_bound = t * (post.v - accel * t / 2.0) + kGeomTol;
    const Vec2 dp = post.p - pre.p;
    if (std::abs(dp.x) > robot_bound || std::abs(dp.y) > robot_bound) {
        report.robot_box_ok = false;
        report.failures.push_back("robot left its bounding square");
    }
    const size_t n = std::min(pre_obstacles.size(), post_obstacles.size());
    for (size_t i = 0; i < n; ++i) {
        const double v_bound = v_bound_override ? *v_bound_override : pre_obstacles[i].v_max;
        const double bound = t * v_bound + kGeomTol;
        const Vec2 dpo = post_obstacles[i].p - pre_obstacles[i].p;
        if (std::abs(dpo.x) > bound || std::abs(dpo.y) > bound) {
            report.obstacle_box_ok = false;
            report.failures.push_back("obstacle " + std::to_string(i + 1) +
                                      " left its bounding square");
        }
    }
    return report;
}

}  // namespace

DiffInvariantReport check_differential_invariants(const RobotState& pre, const RobotState& post,
                                                  double accel, double elapsed,
                                                  std::span<const ObstacleState> pre_obstacles,
                                                  std::span<const ObstacleState> post_obstacles) {
    return check_impl(pre, post, accel, elapsed, pre_obstacles, post_obstacles, nullptr);
}

DiffInvariantReport check_differential_invariants(const RobotState& pre, const RobotState& post,
                                                  double accel, double elapsed, double v_bound,
                                                  const ObstacleState& pre_obstacle,
                                                  const ObstacleState& post_obstacle) {
    return check_impl(pre, post, accel, elapsed, {&pre_obstacle, 1}, {&post_obstacle, 1},
                      &v_bound);
}

}  // namespace dwsafe
