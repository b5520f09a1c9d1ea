#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "dwsafe/monitor.hpp"
#include "dwsafe/rng.hpp"
#include "dwsafe/simulate.hpp"

using namespace dwsafe;

namespace {

WorldParams unit_params() {
    WorldParams p;
    p.A = 1.0;
    p.b = 1.0;
    p.V = 1.0;
    p.eps = 0.05;
    return p;
}

RobotState sample_robot(double v) {
    RobotState r;
    r.p = {1.0, 2.0};
    r.v = v;
    r.d = {0.0, 1.0};
    r.r_c = 2.0;
    r.omega = v / r.r_c;
    r.p_c = r.curve_center();
    return r;
}

std::vector<ObstacleState> one_obstacle(Vec2 p, Vec2 v) {
    ObstacleState o;
    o.p = p;
    o.v = v;
    o.v_max = 1.0;
    return {o};
}

Scenario monitored_scenario(std::uint64_t seed) {
    Scenario s;
    s.mode = SafetyMode::kPassive;
    s.robot.d = {1.0, 0.0};
    s.robot.r_c = kStraightRadius;
    s.robot.p_c = s.robot.curve_center();
    ObstacleState o;
    o.p = {6.0, 1.0};
    o.v_max = s.params.V;
    s.obstacles.push_back(o);
    s.policy = ObstaclePolicyKind::kPursuit;
    s.goal = GoalSpec::toward({25.0, 0.0});
    s.horizon = 8.0;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("braking transition passes via mon_b") {
    const WorldParams p = unit_params();
    const RobotState pre = sample_robot(1.0);
    RobotState post = pre;
    post.a = -p.b;
    post.t = 0.0;
    const auto obstacles = one_obstacle({5.0, 5.0}, {0.3, 0.0});
    const MonitorVerdict v = eval_monitor(pre, post, obstacles, obstacles, p);
    CHECK(v.pass);
    CHECK(v.satisfied_branch == ControlBranch::kBrake);
    CHECK(v.failed_clauses.empty());
}

TEST_CASE("staying stopped passes via mon_s") {
    const WorldParams p = unit_params();
    const RobotState pre = sample_robot(0.0);
    RobotState post = pre;
    post.a = 0.0;
    post.omega = 0.0;
    post.t = 0.0;
    const auto obstacles = one_obstacle({5.0, 5.0}, {0.0, 0.0});
    const MonitorVerdict v = eval_monitor(pre, post, obstacles, obstacles, p);
    CHECK(v.pass);
    CHECK(v.satisfied_branch == ControlBranch::kStay);
}

TEST_CASE("acceleration at an unsafe distance fails with the expected clauses") {
    const WorldParams p = unit_params();
    const RobotState pre = sample_robot(1.0);
    RobotState post = pre;
    post.a = p.A;
    post.r_c = 2.0;
    post.omega = pre.v / post.r_c;
    post.t = 0.0;
    // Obstacle 0.1 away: the accelerating branch needs > 1.7025.
    const auto pre_obs = one_obstacle({1.1, 2.0}, {0.2, 0.0});
    const MonitorVerdict v = eval_monitor(pre, post, pre_obs, pre_obs, p);
    CHECK(!v.pass);
    std::set<std::string> clauses;
    for (const auto& c : v.failed_clauses) clauses.insert(c.clause);
    CHECK(clauses ==
          std::set<std::string>{"mon_a.safedist", "mon_b.accel", "mon_s.velocity"});
    // The distance residual reports the shortfall against the bound.
    for (const auto& c : v.failed_clauses)
        if (c.clause == "mon_a.safedist")
            CHECK(c.residual == doctest::Approx(1.7025 - 0.1).epsilon(1e-9));
}

TEST_CASE("every transition of a compliant passive run passes the relaxed monitor") {
    const Scenario s = monitored_scenario(21);
    const RunResult result = run(s);
    const TraceComplianceReport report = check_trace(result.trace, s.params);
    CHECK(report.pass);
    CHECK(report.steps_checked == static_cast<int>(result.trace.steps.size()));
    CHECK(report.failures == 0);
}

TEST_CASE("strict mode flags moving obstacles between samples") {
    const Scenario s = monitored_scenario(22);
    const RunResult result = run(s);
    MonitorOptions strict;
    strict.strict_obstacle_equality = true;
    const TraceComplianceReport report = check_trace(result.trace, s.params, strict);
    // The pursuit obstacle moves every interval, so braking/staying steps
    // cannot satisfy the position-equality clauses. Accelerating steps can.
    bool any_strict_failure = false;
    for (size_t i = 0; i < result.trace.steps.size(); ++i) {
        const auto branch = result.trace.steps[i].choice.branch;
        if (!report.verdicts[i].pass) {
            any_strict_failure = true;
            CHECK(branch != ControlBranch::kAccelerate);
        }
    }
    CHECK(any_strict_failure);
}

TEST_CASE("single-variable perturbations flip a clause in every branch") {
    const WorldParams p = unit_params();
    const Scenario s = monitored_scenario(23);
    const RunResult result = run(s);
    REQUIRE(!result.trace.steps.empty());
    Rng rng(99);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const TraceStep& step =
            result.trace.steps[rng.below(result.trace.steps.size())];
        if (!eval_monitor(step, p).pass) continue;
        TraceStep mutated = step;
        const double bump = (rng.next_double() < 0.5 ? 1.0 : -1.0) * rng.uniform(1e-6, 0.5);
        switch (rng.below(6)) {
            case 0: mutated.post_robot.p.x += bump; break;
            case 1: mutated.post_robot.v += std::abs(bump); break;
            case 2: mutated.post_robot.d.y += bump; break;
            case 3: mutated.post_robot.a += bump * 10.0; break;
            case 4: mutated.post_robot.t += std::abs(bump); break;
            case 5: mutated.post_robot.omega += bump; break;
        }
        const MonitorVerdict v = eval_monitor(mutated, p);
        if (v.pass) {
            // A perturbation may keep the pair explainable (for example a
            // different admissible acceleration at a safe distance); the
            // verdict must then name a branch.
            CHECK(v.satisfied_branch.has_value());
        } else {
            CHECK(!v.failed_clauses.empty());
        }
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("canned faults fail at the injected step") {
    const WorldParams p = unit_params();
    const Scenario s = monitored_scenario(24);
    Trace trace = run(s).trace;
    REQUIRE(trace.steps.size() > 20);

    SUBCASE("teleport inside a control step") {
        trace.steps[12].post_robot.p.x += 1.0;
        const TraceComplianceReport report = check_trace(trace, p);
        CHECK(!report.pass);
        CHECK(report.first_failing_step == 12);
        std::set<std::string> clauses;
        for (const auto& c : report.verdicts[12].failed_clauses) clauses.insert(c.clause);
        CHECK(clauses.count("mon_b.pos") == 1);
        CHECK(clauses.count("mon_s.velocity") + clauses.count("mon_s.pos") >= 1);
        CHECK(clauses.count("mon_a.pos") == 1);
    }
    SUBCASE("over-acceleration") {
        trace.steps[7].post_robot.a = p.A + 0.5;
        const TraceComplianceReport report = check_trace(trace, p);
        CHECK(!report.pass);
        CHECK(report.first_failing_step == 7);
    }
    SUBCASE("obstacle overspeed") {
        trace.steps[9].post_obstacles[0].v = {p.V + 0.1, 0.0};
        const TraceComplianceReport report = check_trace(trace, p);
        CHECK(!report.pass);
        CHECK(report.first_failing_step == 9);
        bool mon_o = false;
        for (const auto& c : report.verdicts[9].failed_clauses)
            if (c.clause == "mon_o.obstacle_speed") mon_o = true;
        CHECK(mon_o);
    }
}

TEST_CASE("fallback always brakes on the previous curve") {
    const WorldParams p = unit_params();
    ControlChoice accelerate;
    accelerate.branch = ControlBranch::kAccelerate;
    accelerate.a = p.A;
    accelerate.omega = 0.5;
    accelerate.r_c = 2.0;
    const ControlChoice fb = fallback(accelerate, p);
    CHECK(fb.branch == ControlBranch::kBrake);
    CHECK(fb.a == -p.b);
    CHECK(fb.r_c == 2.0);
    const ControlChoice fb2 = fallback(fb, p);
    CHECK(fb2.branch == ControlBranch::kBrake);
    CHECK(fb2.a == -p.b);
    CHECK(fb2.r_c == 2.0);
}
