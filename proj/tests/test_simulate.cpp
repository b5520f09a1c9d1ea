#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dwsafe/rng.hpp"
#include "dwsafe/simulate.hpp"

using namespace dwsafe;

namespace {

Scenario passive_headon() {
    Scenario s;
    s.mode = SafetyMode::kPassive;
    s.params.A = 1.0;
    s.params.b = 1.0;
    s.params.V = 1.0;
    s.params.eps = 0.05;
    s.robot.p = {0.0, 0.0};
    s.robot.d = {1.0, 0.0};
    s.robot.r_c = kStraightRadius;
    s.robot.p_c = s.robot.curve_center();
    ObstacleState o;
    o.p = {8.0, 0.0};
    o.v_max = s.params.V;
    s.obstacles.push_back(o);
    s.policy = ObstaclePolicyKind::kHeadOn;
    s.goal = GoalSpec::toward({30.0, 0.0});
    s.horizon = 10.0;
    s.seed = 5;
    return s;
}

}  // namespace

TEST_CASE("observe is exact without refinements") {
    const WorldParams p;
    RobotState r;
    r.p = {1.0, 2.0};
    r.v = 0.5;
    r.omega = 0.5 / r.r_c;
    Rng rng(1);
    const Observation obs = observe(r, {}, {}, p, rng);
    CHECK(obs.robot.p == r.p);
    CHECK(obs.v_hat == r.v);
}

TEST_CASE("observe samples within the measurement bounds") {
    WorldParams p;
    p.Delta_p = 0.5;
    p.Delta_v = 0.1;
    RefinementSet refs;
    refs.add(Refinement::kLocationUncertainty);
    refs.add(Refinement::kVelocityUncertainty);
    RobotState r;
    r.p = {3.0, -1.0};
    r.v = 0.0;
    Rng rng(2);
    for (int i = 0; i < 5000; ++i) {
        const Observation obs = observe(r, {}, refs, p, rng);
        CHECK(norm_2(obs.robot.p - r.p) <= p.Delta_p + 1e-12);
        CHECK(obs.v_hat >= 0.0);
        CHECK(obs.v_hat <= r.v + p.Delta_v + 1e-12);
    }
}

TEST_CASE("actuate scales by a damping in [Delta_a, 1]") {
    WorldParams p;
    p.Delta_a = 0.5;
    RefinementSet refs;
    ControlChoice brake;
    brake.a = -p.b;
    Rng rng(3);
    CHECK(actuate(brake, refs, p, rng) == -p.b);  // refinement off
    refs.add(Refinement::kActuatorPerturbation);
    for (int i = 0; i < 2000; ++i) {
        const double a = actuate(brake, refs, p, rng);
        CHECK(a <= -p.b * p.Delta_a + 1e-12);  // weakest braking is -b Delta_a
        CHECK(a >= -p.b - 1e-12);
    }
    ControlChoice full;
    full.a = p.A;
    for (int i = 0; i < 100; ++i) {
        const double a = actuate(full, refs, p, rng);
        CHECK(a >= p.A * p.Delta_a - 1e-12);
        CHECK(a <= p.A + 1e-12);
    }
}

TEST_CASE("static worlds never move their obstacles") {
    Scenario s = passive_headon();
    s.mode = SafetyMode::kStatic;
    s.params.V = 0.0;
    s.obstacles[0].v_max = 0.0;
    s.obstacles[0].p = {3.0, 1.0};
    for (ObstaclePolicyKind kind :
         {ObstaclePolicyKind::kRandom, ObstaclePolicyKind::kHeadOn, ObstaclePolicyKind::kPursuit,
          ObstaclePolicyKind::kBlocker}) {
        s.policy = kind;
        const RunResult result = run(s);
        for (const TraceStep& step : result.trace.steps) {
            CHECK(step.post_obstacles[0].p == s.obstacles[0].p);
            CHECK(step.post_obstacles[0].v == Vec2{0.0, 0.0});
        }
    }
}

TEST_CASE("passive head-on run stays safe and keeps its invariants") {
    const Scenario s = passive_headon();
    RunOptions options;
    options.check_monitor = true;
    const RunResult result = run(s, options);
    CHECK(!result.summary.psi_violation);
    CHECK(result.summary.min_moving_distance > 0.0);
    CHECK(result.summary.loop_invariant_failures == 0);
    CHECK(result.summary.diff_invariant_failures == 0);
    CHECK(result.summary.monitor_failures == 0);
    CHECK(result.summary.steps == 200);
}

TEST_CASE("identical scenario and seed reproduce the trace bit for bit") {
    const Scenario s = passive_headon();
    const RunResult a = run(s);
    const RunResult b = run(s);
    std::ostringstream csv_a, csv_b;
    write_trace_csv(a.trace, csv_a);
    write_trace_csv(b.trace, csv_b);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(!csv_a.str().empty());

    Scenario other = s;
    other.seed = 6;
    other.policy = ObstaclePolicyKind::kRandom;
    std::ostringstream csv_c;
    write_trace_csv(run(other).trace, csv_c);
    CHECK(csv_a.str() != csv_c.str());
}

TEST_CASE("trace csv round trips") {
    Scenario s = passive_headon();
    s.horizon = 1.0;
    const Trace trace = run(s).trace;
    std::ostringstream out;
    write_trace_csv(trace, out);
    std::istringstream in(out.str());
    const Trace back = read_trace_csv(in);
    REQUIRE(back.steps.size() == trace.steps.size());
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        CHECK(back.steps[i].t_model == trace.steps[i].t_model);
        CHECK(back.steps[i].pre_robot.p == trace.steps[i].pre_robot.p);
        CHECK(back.steps[i].post_robot.a == trace.steps[i].post_robot.a);
        CHECK(back.steps[i].post_obstacles[0].p == trace.steps[i].post_obstacles[0].p);
        CHECK(back.steps[i].post_obstacles[0].v == trace.steps[i].post_obstacles[0].v);
    }
}

TEST_CASE("states produced by the harness keep the robot invariants") {
    Scenario s = passive_headon();
    s.policy = ObstaclePolicyKind::kPursuit;
    s.horizon = 5.0;
    const RunResult result = run(s);
    CHECK(result.summary.final_robot.invariants_hold());
    for (size_t i = 0; i < result.trace.steps.size(); i += 17) {
        CHECK(result.trace.steps[i].pre_robot.invariants_hold());
        CHECK(result.trace.steps[i].post_robot.invariants_hold());
    }
}

TEST_CASE("model time increases strictly across steps") {
    const Scenario s = passive_headon();
    const Trace trace = run(s).trace;
    for (size_t i = 1; i < trace.steps.size(); ++i) {
        CHECK(trace.steps[i].t_model > trace.steps[i - 1].t_model);
        CHECK(trace.steps[i].t_model - trace.steps[i - 1].t_model <= s.params.eps + 1e-12);
    }
}

TEST_CASE("non-synchronized obstacle control keeps the run safe") {
    Scenario s = passive_headon();
    s.refinements.add(Refinement::kNonSync);
    s.policy = ObstaclePolicyKind::kPursuit;
    s.random_cycle_time = true;
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        s.seed = seed;
        const RunResult result = run(s);
        CHECK(!result.summary.psi_violation);
        CHECK(result.summary.loop_invariant_failures == 0);
        CHECK(result.summary.diff_invariant_failures == 0);
    }
}

TEST_CASE("multi-obstacle runs check every obstacle") {
    Scenario s = passive_headon();
    s.refinements.add(Refinement::kMultiObstacle);
    ObstacleState slow;
    slow.p = {4.0, 3.0};
    slow.v_max = 0.4;
    s.obstacles.push_back(slow);
    ObstacleState fast;
    fast.p = {-6.0, -2.0};
    fast.v_max = 1.5;
    s.obstacles.push_back(fast);
    s.policy = ObstaclePolicyKind::kPursuit;
    const RunResult result = run(s);
    CHECK(!result.summary.psi_violation);
    CHECK(result.summary.loop_invariant_failures == 0);
}

TEST_CASE("run rejects invalid scenarios") {
    Scenario s = passive_headon();
    s.robot.v = 0.5;  // passive initial condition needs rest
    s.robot.omega = 0.5 / s.robot.r_c;
    CHECK_THROWS_AS(static_cast<void>(run(s)), std::invalid_argument);
}

TEST_CASE("batch runs match sequential runs") {
    std::vector<Scenario> scenarios;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Scenario s = passive_headon();
        s.seed = seed;
        s.horizon = 3.0;
        s.policy = ObstaclePolicyKind::kPursuit;
        scenarios.push_back(s);
    }
    RunOptions options;
    options.record_trace = false;
    const std::vector<RunResult> parallel = run_batch(scenarios, options, 2);
    for (size_t i = 0; i < scenarios.size(); ++i) {
        const RunResult solo = run(scenarios[i], options);
        CHECK(parallel[i].summary.min_moving_distance == solo.summary.min_moving_distance);
        CHECK(parallel[i].summary.steps == solo.summary.steps);
    }
}
