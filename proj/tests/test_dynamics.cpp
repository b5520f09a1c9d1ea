#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwsafe/dynamics.hpp"
#include "dwsafe/rng.hpp"
#include "rk4_oracle.hpp"

using namespace dwsafe;
using dwsafe::testing::OdeState;
using dwsafe::testing::rk4_flow;

namespace {

RobotState on_curve(Vec2 p, double v, Vec2 d, double r_c) {
    RobotState r;
    r.p = p;
    r.v = v;
    r.d = d;
    r.r_c = r_c;
    r.omega = v / r_c;
    r.p_c = r.curve_center();
    return r;
}

}  // namespace

TEST_CASE("quarter arc") {
    const RobotState pre = on_curve({0.0, 0.0}, 2.0, {0.0, -1.0}, 2.0);
    REQUIRE(pre.p_c == Vec2{2.0, 0.0});
    const FlowResult f = flow_robot(pre, 0.0, 1.0, 2.0, M_PI / 2.0);
    CHECK(f.post.p.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.post.p.y == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.post.d.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.post.d.y == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(f.post.v == 2.0);
    CHECK(!f.stopped_at);
    CHECK(f.elapsed == M_PI / 2.0);
}

TEST_CASE("braking stops the evolution early") {
    const RobotState pre = on_curve({0.0, 0.0}, 1.0, {1.0, 0.0}, 5.0);
    const FlowResult f = flow_robot(pre, -1.0, 0.2, 5.0, 2.0);
    REQUIRE(f.stopped_at.has_value());
    CHECK(*f.stopped_at == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.post.v == 0.0);
    CHECK(f.elapsed == doctest::Approx(1.0).epsilon(1e-12));
    // Arc length 0.5 along the curve.
    CHECK(f.post.beta == doctest::Approx(0.5 / 5.0).epsilon(1e-9));
}

TEST_CASE("rest is a fixed point") {
    const RobotState pre = on_curve({1.0, 2.0}, 0.0, {0.0, 1.0}, 3.0);
    const FlowResult f = flow_robot(pre, 0.0, 0.0, 3.0, 4.0);
    CHECK(f.post.p == pre.p);
    CHECK(f.post.d == pre.d);
    CHECK(f.post.v == 0.0);
    CHECK(f.elapsed == 4.0);
}

TEST_CASE("flow rejects bad arguments") {
    const RobotState pre = on_curve({0.0, 0.0}, 1.0, {1.0, 0.0}, 1.0);
    CHECK_THROWS(flow_robot(pre, 0.0, 1.0, 1.0, -0.1));
    CHECK_THROWS(flow_robot(pre, 0.0, 1.0, 0.0, 0.1));
    CHECK_THROWS(flow_robot(pre, 0.0, 0.5, 1.0, 0.1));  // omega inconsistent
    RobotState bad = pre;
    bad.d = {1.0, 1.0};
    CHECK_THROWS(flow_robot(bad, 0.0, 1.0, 1.0, 0.1));
}

TEST_CASE("obstacle flows") {
    ObstacleState o;
    o.p = {0.0, 0.0};
    o.v = {1.0, 0.0};
    CHECK(flow_obstacle(o, 2.0).p == Vec2{2.0, 0.0});
    o.v = {0.0, 0.0};
    CHECK(flow_obstacle(o, 5.0).p == o.p);
    o.p = {1.0, 1.0};
    o.v = {-1.0, 2.0};
    CHECK(flow_obstacle(o, 0.5).p == Vec2{0.5, 2.0});
}

TEST_CASE("refined obstacle flow") {
    ObstacleState o;
    o.d = {1.0, 0.0};
    o.v = {1.0, 0.0};

    SUBCASE("accelerating") {
        o.a = 1.0;
        const ObstacleState post = flow_refined_obstacle(o, 1.0);
        CHECK(post.p.x == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(post.speed() == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("uniform motion") {
        o.a = 0.0;
        CHECK(flow_refined_obstacle(o, 2.0).p == Vec2{2.0, 0.0});
    }
    SUBCASE("stop clipping") {
        o.a = -1.0;
        const ObstacleState post = flow_refined_obstacle(o, 2.0);
        CHECK(post.p.x == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(post.speed() == 0.0);
    }
}

TEST_CASE("differential invariants on the quarter arc") {
    const RobotState pre = on_curve({0.0, 0.0}, 2.0, {0.0, -1.0}, 2.0);
    const FlowResult f = flow_robot(pre, 0.0, 1.0, 2.0, M_PI / 2.0);
    ObstacleState o;
    o.p = {5.0, 5.0};
    o.v = {0.4, 0.0};
    o.v_max = 1.0;
    const ObstacleState o_post = flow_obstacle(o, f.elapsed);
    const DiffInvariantReport report =
        check_differential_invariants(pre, f.post, 0.0, f.elapsed, 1.0, o, o_post);
    CHECK(report.all_ok());
    // Bound pi versus displacement components (2, 2).
    CHECK(f.elapsed * f.post.v == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("differential invariants flag a teleport") {
    const RobotState pre = on_curve({0.0, 0.0}, 1.0, {1.0, 0.0}, 10.0);
    FlowResult f = flow_robot(pre, 0.0, 0.1, 10.0, 0.05);
    f.post.p.x += 1.0;
    ObstacleState o;
    const DiffInvariantReport report =
        check_differential_invariants(pre, f.post, 0.0, f.elapsed, 0.0, o, o);
    CHECK(!report.robot_box_ok);
    CHECK(!report.all_ok());
}

TEST_CASE("differential invariants pass with equality at t = 0") {
    const RobotState pre = on_curve({0.0, 0.0}, 1.0, {1.0, 0.0}, 10.0);
    ObstacleState o;
    const DiffInvariantReport report = check_differential_invariants(pre, pre, 0.0, 0.0, 0.0, o, o);
    CHECK(report.all_ok());
}

TEST_CASE("closed form agrees with the RK4 oracle") {
    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
        const double v = rng.uniform(0.0, 10.0);
        const double a = rng.uniform(-10.0, 10.0);
        const double r_mag = std::exp(rng.uniform(std::log(0.1), std::log(1e6)));
        const double r_c = rng.next_double() < 0.5 ? r_mag : -r_mag;
        const double dt = rng.uniform(0.0, 1.0);
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        const RobotState pre =
            on_curve({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)}, v,
                     {std::cos(heading), std::sin(heading)}, r_c);
        const FlowResult f = flow_robot(pre, a, pre.omega, r_c, dt);
        const OdeState oracle = rk4_flow(pre, a, r_c, dt);
        CHECK(norm_2(f.post.p - oracle.p) < 1e-6);
        CHECK(std::abs(f.post.v - oracle.v) < 1e-9);
        CHECK(norm_2(f.post.d - oracle.d) < 1e-6);
    }
}

TEST_CASE("flow composes over subintervals") {
    Rng rng(37);
    for (int i = 0; i < 300; ++i) {
        const double v = rng.uniform(0.1, 5.0);
        const double a = rng.uniform(0.0, 3.0);  // no stop: composition applies
        const double r_c = (rng.next_double() < 0.5 ? 1.0 : -1.0) * rng.uniform(0.5, 50.0);
        const double dt1 = rng.uniform(0.0, 0.5);
        const double dt2 = rng.uniform(0.0, 0.5);
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        const RobotState pre =
            on_curve({0.0, 0.0}, v, {std::cos(heading), std::sin(heading)}, r_c);
        const FlowResult whole = flow_robot(pre, a, pre.omega, r_c, dt1 + dt2);
        const FlowResult first = flow_robot(pre, a, pre.omega, r_c, dt1);
        const FlowResult second =
            flow_robot(first.post, a, first.post.omega, r_c, dt2);
        CHECK(norm_2(whole.post.p - second.post.p) < 1e-9);
        CHECK(std::abs(whole.post.v - second.post.v) < 1e-9);
        CHECK(norm_2(whole.post.d - second.post.d) < 1e-9);
    }
}

TEST_CASE("orientation stays unit and the rigid link is exact") {
    Rng rng(41);
    RobotState state = on_curve({0.0, 0.0}, 1.0, {1.0, 0.0}, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(-0.5, 0.5);
        const double dt = rng.uniform(0.0, 0.05);
        const FlowResult f = flow_robot(state, std::max(a, -state.v / std::max(dt, 1e-9)),
                                        state.omega, state.r_c, dt);
        CHECK(std::abs(norm_2(f.post.d) - 1.0) < 1e-12 * (i + 1));
        CHECK(f.post.omega * f.post.r_c == f.post.v);
        state = f.post;
        if (state.v == 0.0) state.v = 1.0;  // keep the run going
        state.omega = state.v / state.r_c;
    }
    CHECK(std::abs(norm_2(state.d) - 1.0) < 1e-11);
}
