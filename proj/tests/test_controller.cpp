#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dwsafe/controller.hpp"
#include "dwsafe/rng.hpp"
#include "dwsafe/safety.hpp"

using namespace dwsafe;

namespace {

WorldParams unit_params() {
    WorldParams p;
    p.A = 1.0;
    p.b = 1.0;
    p.V = 1.0;
    p.eps = 0.05;
    p.Omega = 2.0;
    return p;
}

RobotState moving_robot(double v) {
    RobotState r;
    r.v = v;
    r.d = {1.0, 0.0};
    r.r_c = kStraightRadius;
    r.omega = v / r.r_c;
    r.p_c = r.curve_center();
    return r;
}

Observation observe_exact(const RobotState& r, std::span<const ObstacleState> obstacles) {
    Observation obs;
    obs.robot = r;
    obs.v_hat = r.v;
    obs.obstacles = obstacles;
    return obs;
}

}  // namespace

TEST_CASE("decide brakes when no candidate clears the bound") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    const RobotState robot = moving_robot(1.0);
    ObstacleState o;
    o.p = {0.1, 0.0};
    o.v_max = p.V;
    const ControlChoice c = decide(SafetyMode::kPassive, {}, observe_exact(robot, {&o, 1}), p,
                                   grid, GoalSpec::toward({100.0, 0.0}));
    CHECK(c.branch == ControlBranch::kBrake);
    CHECK(c.a == -p.b);
    CHECK(c.r_c == robot.r_c);
}

TEST_CASE("decide stays when stopped next to an obstacle") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    const RobotState robot = moving_robot(0.0);
    ObstacleState o;
    // Inside even the at-rest bound (A/b+1)(A/2 eps^2 + eps V) = 0.1025.
    o.p = {0.05, 0.0};
    o.v_max = p.V;
    const ControlChoice c = decide(SafetyMode::kPassive, {}, observe_exact(robot, {&o, 1}), p,
                                   grid, GoalSpec::toward({100.0, 0.0}));
    CHECK(c.branch == ControlBranch::kStay);
    CHECK(c.a == 0.0);
    CHECK(c.omega == 0.0);
}

TEST_CASE("decide accelerates at full power toward a clear goal") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    const RobotState robot = moving_robot(1.0);
    ObstacleState o;
    o.p = {100.0, 100.0};
    o.v_max = p.V;
    const ControlChoice c = decide(SafetyMode::kPassive, {}, observe_exact(robot, {&o, 1}), p,
                                   grid, GoalSpec::toward({100.0, 0.0}));
    CHECK(c.branch == ControlBranch::kAccelerate);
    CHECK(c.a == p.A);
    CHECK(c.r_c == kStraightRadius);  // goal dead ahead
    CHECK(std::abs(c.omega) <= robot.v / kStraightRadius);
}

TEST_CASE("decide is deterministic") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    const RobotState robot = moving_robot(0.7);
    ObstacleState o;
    o.p = {4.0, 1.0};
    o.v_max = p.V;
    const GoalSpec goal = GoalSpec::toward({8.0, 3.0});
    const ControlChoice a = decide(SafetyMode::kPassive, {}, observe_exact(robot, {&o, 1}), p,
                                   grid, goal);
    const ControlChoice b = decide(SafetyMode::kPassive, {}, observe_exact(robot, {&o, 1}), p,
                                   grid, goal);
    CHECK(a.branch == b.branch);
    CHECK(a.a == b.a);
    CHECK(a.omega == b.omega);
    CHECK(a.r_c == b.r_c);
}

TEST_CASE("accelerating choices always satisfy the safety guard") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    Rng rng(43);
    int accelerates = 0;
    for (int i = 0; i < 2000; ++i) {
        RobotState robot = moving_robot(rng.uniform(0.0, 2.0));
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        robot.d = {std::cos(heading), std::sin(heading)};
        if (robot.v > 0.0 && rng.next_double() < 0.5) {
            robot.r_c = (rng.next_double() < 0.5 ? 1.0 : -1.0) * rng.uniform(0.5, 20.0);
            robot.omega = robot.v / robot.r_c;
        }
        robot.p_c = robot.curve_center();
        std::vector<ObstacleState> obstacles(2);
        for (auto& o : obstacles) {
            o.p = {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
            o.v_max = p.V;
        }
        const SafetyMode mode = i % 2 == 0 ? SafetyMode::kPassive : SafetyMode::kPassiveFriendly;
        const ControlChoice c =
            decide(mode, {}, observe_exact(robot, obstacles), p, grid,
                   GoalSpec::toward({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)}));
        if (c.branch != ControlBranch::kAccelerate) continue;
        ++accelerates;
        SafetyQuery q;
        q.mode = mode;
        q.v_r = robot.v;
        q.v_hat = robot.v;
        q.a_r = c.a;
        q.r_c = c.r_c;
        q.params = &p;
        for (const auto& o : obstacles) CHECK(is_safe_curve(robot, o, q));
        CHECK(std::abs(c.omega * c.r_c - robot.v) < 1e-9 * std::max(1.0, robot.v));
        CHECK(c.r_c != 0.0);
        CHECK(c.a >= -p.b);
        CHECK(c.a <= p.A);
    }
    CHECK(accelerates > 100);  // the property must actually get exercised
}

TEST_CASE("turn-in-place flips the heading toward a goal behind") {
    const WorldParams p = unit_params();
    const CandidateSet grid = CandidateSet::default_grid(p);
    RefinementSet refs;
    refs.add(Refinement::kTrajectoryDistance);
    RobotState robot = moving_robot(0.0);
    ObstacleState o;
    o.p = {0.02, 0.0};  // blocks every forward candidate
    o.v_max = p.V;
    const ControlChoice c = decide(SafetyMode::kPassive, refs, observe_exact(robot, {&o, 1}), p,
                                   grid, GoalSpec::toward({-20.0, 0.0}));
    CHECK(c.branch == ControlBranch::kStay);
    CHECK(c.d_flip);
    // Goal ahead: no flip.
    const ControlChoice ahead = decide(SafetyMode::kPassive, refs, observe_exact(robot, {&o, 1}),
                                       p, grid, GoalSpec::toward({20.0, 0.0}));
    CHECK(!ahead.d_flip);
}

TEST_CASE("orientation mode requires clear distance ahead") {
    WorldParams p = unit_params();
    p.gamma = 0.4;  // narrow sector: sharp curves cannot stop inside it
    const CandidateSet grid = CandidateSet::default_grid(p);
    RobotState robot = moving_robot(1.5);
    ObstacleState o;
    o.p = {50.0, 0.0};
    o.v_max = p.V;
    const ControlChoice c =
        decide(SafetyMode::kPassiveOrientation, {}, observe_exact(robot, {&o, 1}), p, grid,
               GoalSpec::toward({100.0, 0.0}));
    if (c.branch == ControlBranch::kAccelerate) {
        CHECK(cda_ok(robot.v, c.r_c, p));
    }
}

TEST_CASE("waypoint controller follows the witness branches") {
    WorldParams p = unit_params();
    p.V_g = 1.0;
    p.Delta_g = 0.5;
    WaypointGoal goal;
    goal.p_g = 0.0;

    SUBCASE("approach from far away, capped at A") {
        const ControlChoice c = waypoint_decide(-10.0, 0.0, goal, p);
        CHECK(c.branch == ControlBranch::kAccelerate);
        CHECK(c.a == doctest::Approx(std::min((p.V_g - 0.0) / p.eps, p.A)).epsilon(1e-12));
        CHECK(c.a == p.A);  // (1 - 0) / 0.05 = 20 caps at A
    }
    SUBCASE("inside the region while moving: brake") {
        const ControlChoice c = waypoint_decide(0.0, 0.4, goal, p);
        CHECK(c.branch == ControlBranch::kBrake);
        CHECK(c.a == -p.b);
    }
    SUBCASE("inside the region at rest: stay") {
        const ControlChoice c = waypoint_decide(0.1, 0.0, goal, p);
        CHECK(c.branch == ControlBranch::kStay);
        CHECK(c.a == 0.0);
    }
    SUBCASE("cruise at the approach velocity") {
        const ControlChoice c = waypoint_decide(-10.0, p.V_g, goal, p);
        CHECK(c.branch == ControlBranch::kAccelerate);
        CHECK(c.a == 0.0);
    }
}

TEST_CASE("waypoint deadline feasibility") {
    WorldParams p = unit_params();
    p.V_g = 1.0;
    p.Delta_g = 0.5;
    WaypointGoal goal;
    goal.p_g = 10.0 + p.Delta_g;  // distance to region start: 10
    // (V_g - 0)/A + 10/V_g + V_g/b + eps = 1 + 10 + 1 + 0.05 = 12.05
    CHECK(waypoint_deadline_feasible(0.0, 0.0, goal, p, 13.0));
    CHECK(!waypoint_deadline_feasible(0.0, 0.0, goal, p, 12.0));
}

TEST_CASE("intersection guards reproduce the model arithmetic") {
    WorldParams p = unit_params();
    p.eps = 0.05;
    p.A = 1.0;
    IntersectionGoal goal;
    goal.p_x = {10.0, 10.0};

    SUBCASE("past the intersection: anything goes") {
        const ControlChoice c = intersection_decide(10.5, 1.0, 0.0, 1.0, goal, p);
        CHECK(c.branch == ControlBranch::kAccelerate);
        CHECK(c.a == p.A);
    }
    SUBCASE("pass behind a fast obstacle") {
        p.V_min = 3.0;
        // V_min (p_x - p_r)/(v + A eps) = 3*10/2.05 = 14.63 > 10
        const IntersectionGuards g = intersection_guards(0.0, 2.0, 0.0, 3.0, goal, p);
        CHECK(g.pass_behind);
        const ControlChoice c = intersection_decide(0.0, 2.0, 0.0, 3.0, goal, p);
        CHECK(c.branch == ControlBranch::kAccelerate);
        CHECK(c.a == p.A);
    }
    SUBCASE("all passes fail: fall back to collision avoidance") {
        p.V_min = 1.0;
        const IntersectionGuards g = intersection_guards(0.0, 2.0, 0.0, 1.0, goal, p);
        CHECK(!g.pass_behind);  // 10/2.05 = 4.88 < 10
        CHECK(!g.pass_front);   // 0 + 1*5 + 1*25 = 30 > 10
        CHECK(!g.pass_const);   // 1*5 = 5 < 10
        const ControlChoice c = intersection_decide(0.0, 2.0, 0.0, 1.0, goal, p);
        // Far from the crossing: the fallback may still accelerate while a
        // full stop before the intersection stays possible.
        const double stop_point = 0.0 + stopping_distance(2.0, p.b) +
                                  accel_compensation(2.0, p.A, p.b, p.eps);
        CHECK(stop_point < goal.p_x.x);
        CHECK(c.branch == ControlBranch::kAccelerate);

        // Too close to stop before the crossing, obstacle near it: brake.
        const IntersectionGuards close = intersection_guards(8.5, 2.0, 9.0, 1.0, goal, p);
        CHECK(!close.pass_front);
        CHECK(!close.pass_behind);
        CHECK(!close.pass_const);
        const ControlChoice brake = intersection_decide(8.5, 2.0, 9.0, 1.0, goal, p);
        CHECK(brake.branch == ControlBranch::kBrake);
    }
}

TEST_CASE("intersection deadline feasibility") {
    WorldParams p = unit_params();
    IntersectionGoal goal;
    goal.p_x = {10.0, 10.0};
    // D = eps leaves zero driving time unless already past.
    CHECK(!intersection_deadline_feasible(0.0, goal, p, p.eps));
    CHECK(intersection_deadline_feasible(0.0, goal, p, p.eps + std::sqrt(2.0 * 10.0 / p.A) + 0.1));
}

TEST_CASE("visibility sector") {
    RobotState robot = moving_robot(1.0);
    robot.d = {1.0, 0.0};
    CHECK(visibility(robot, {5.0, 0.0}, 1.0));         // dead ahead
    CHECK(!visibility(robot, {-5.0, 0.0}, 5.0));       // behind, gamma < 2 pi
    CHECK(visibility(robot, {1.0, 1.0}, M_PI / 2.0));  // angle pi/4 == gamma/2: inclusive
    CHECK(visibility(robot, robot.p, 0.5));            // coincident counts visible
}
