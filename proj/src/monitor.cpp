#include "dwsafe/monitor.hpp"

#include <cmath>
#include <sstream>

#include "dwsafe/safety.hpp"

namespace dwsafe {

namespace {

// Clause bookkeeping. Each set reports its first violated clause with a
// residual saying how far the clause is from holding.
struct ClauseSet {
    std::vector<ClauseFailure>* sink;
    bool all_ok = true;

    void equality(const char* name, double lhs, double rhs, double tol) {
        if (!all_ok) return;
        const double residual = std::abs(lhs - rhs) - tol;
        if (residual > 0.0) fail(name, residual);
    }
    void strictly_above(const char* name, double value, double bound) {
        if (!all_ok) return;
        if (!(value > bound)) fail(name, bound - value);
    }
    void at_most(const char* name, double value, double bound, double tol) {
        if (!all_ok) return;
        if (value > bound + tol) fail(name, value - bound);
    }
    void fail(const char* name, double residual) {
        if (!all_ok) return;
        all_ok = false;
        if (sink) sink->push_back({name, std::max(residual, 0.0)});
    }
};

}  // namespace

MonitorVerdict eval_monitor(const RobotState& pre, const RobotState& post,
                            std::span<const ObstacleState> pre_obstacles,
                            std::span<const ObstacleState> post_obstacles,
                            const WorldParams& params, const MonitorOptions& options) {
    MonitorVerdict verdict;
    const double tol = options.tolerance;

    ClauseSet top{&verdict.failed_clauses};
    // mon_o: the measured obstacle velocity respects the model bound.
    for (const ObstacleState& o : post_obstacles)
        top.at_most("mon_o.obstacle_speed", norm_2(o.v), params.V, tol);
    // mon_dyn: evolution domain and clock reset.
    if (!(params.eps >= 0.0)) top.fail("mon_dyn.eps", 0.0);
    if (!(pre.v >= 0.0)) top.fail("mon_dyn.vr", -pre.v);
    top.equality("mon_dyn.t", post.t, 0.0, tol);

    const size_t n = std::min(pre_obstacles.size(), post_obstacles.size());
    auto obstacles_unchanged = [&](ClauseSet* set, const char* name) {
        if (options.strict_obstacle_equality) {
            for (size_t i = 0; i < n; ++i) {
                set->equality(name, post_obstacles[i].p.x, pre_obstacles[i].p.x, tol);
                set->equality(name, post_obstacles[i].p.y, pre_obstacles[i].p.y, tol);
            }
        }
    };

    // mon_b: only the brakes are hit, nothing else changes. State-equality
    // clauses come first so faults like teleports name the position clause.
    ClauseSet brake{&verdict.failed_clauses};
    brake.equality("mon_b.pos", post.p.x, pre.p.x, tol);
    brake.equality("mon_b.pos", post.p.y, pre.p.y, tol);
    brake.equality("mon_b.dir", post.d.x, pre.d.x, tol);
    brake.equality("mon_b.dir", post.d.y, pre.d.y, tol);
    brake.equality("mon_b.vel", post.v, pre.v, tol);
    obstacles_unchanged(&brake, "mon_b.obstacle_pos");
    brake.equality("mon_b.accel", post.a, -params.b, tol);
    brake.equality("mon_b.omega", post.omega, pre.omega, tol);
    brake.equality("mon_b.radius", post.r_c, pre.r_c, tol);

    // mon_s: stay stopped.
    ClauseSet stay{&verdict.failed_clauses};
    stay.equality("mon_s.pos", post.p.x, pre.p.x, tol);
    stay.equality("mon_s.pos", post.p.y, pre.p.y, tol);
    stay.equality("mon_s.dir", post.d.x, pre.d.x, tol);
    stay.equality("mon_s.dir", post.d.y, pre.d.y, tol);
    stay.equality("mon_s.vel", post.v, pre.v, tol);
    obstacles_unchanged(&stay, "mon_s.obstacle_pos");
    stay.equality("mon_s.velocity", pre.v, 0.0, tol);
    stay.equality("mon_s.accel", post.a, 0.0, tol);
    stay.equality("mon_s.omega", post.omega, 0.0, tol);
    stay.equality("mon_s.radius", post.r_c, pre.r_c, tol);

    // mon_a: a fresh curve within the physical limits at a safe distance,
    // measured against the newly observed obstacle positions.
    ClauseSet acc{&verdict.failed_clauses};
    acc.equality("mon_a.pos", post.p.x, pre.p.x, tol);
    acc.equality("mon_a.pos", post.p.y, pre.p.y, tol);
    acc.equality("mon_a.dir", post.d.x, pre.d.x, tol);
    acc.equality("mon_a.dir", post.d.y, pre.d.y, tol);
    acc.equality("mon_a.vel", post.v, pre.v, tol);
    if (!(post.a >= -params.b - tol && post.a <= params.A + tol))
        acc.fail("mon_a.accel_bounds",
                 std::max(-params.b - post.a, post.a - params.A));
    if (!(post.r_c != 0.0)) acc.fail("mon_a.radius_nonzero", 0.0);
    acc.equality("mon_a.rigid_link", post.omega * post.r_c, pre.v,
                 tol * std::max(1.0, std::abs(pre.v)));
    SafetyQuery query;
    query.mode = SafetyMode::kPassive;
    query.v_r = pre.v;
    query.v_hat = pre.v;
    query.params = &params;
    const double bound = safe_distance(query, params.V);
    for (size_t i = 0; i < post_obstacles.size(); ++i)
        acc.strictly_above("mon_a.safedist", norm_inf(pre.p - post_obstacles[i].p), bound);

    const bool branch_ok = brake.all_ok || stay.all_ok || acc.all_ok;
    verdict.pass = top.all_ok && branch_ok;
    if (verdict.pass) {
        verdict.failed_clauses.clear();
        if (brake.all_ok) verdict.satisfied_branch = ControlBranch::kBrake;
        else if (stay.all_ok) verdict.satisfied_branch = ControlBranch::kStay;
        else verdict.satisfied_branch = ControlBranch::kAccelerate;
    }
    return verdict;
}

MonitorVerdict eval_monitor(const TraceStep& step, const WorldParams& params,
                            const MonitorOptions& options) {
    return eval_monitor(step.pre_robot, step.post_robot, step.pre_obstacles, step.post_obstacles,
                        params, options);
}

TraceComplianceReport check_trace(const Trace& trace, const WorldParams& params,
                                  const MonitorOptions& options) {
    TraceComplianceReport report;
    report.verdicts.reserve(trace.steps.size());
    for (const TraceStep& step : trace.steps) {
        MonitorVerdict v = eval_monitor(step, params, options);
        if (!v.pass) {
            ++report.failures;
            if (report.first_failing_step < 0) report.first_failing_step = step.step;
            report.pass = false;
        }
        ++report.steps_checked;
        report.verdicts.push_back(std::move(v));
    }
    return report;
}

std::string TraceComplianceReport::to_text() const {
    std::ostringstream out;
    out << (pass ? "COMPLIANT" : "VIOLATION") << " steps=" << steps_checked
        << " failures=" << failures;
    if (!pass) out << " first_failing_step=" << first_failing_step;
    out << "\n";
    for (size_t i = 0; i < verdicts.size(); ++i) {
        const MonitorVerdict& v = verdicts[i];
        if (v.pass) continue;
        out << "step " << i << ": FAIL";
        for (const ClauseFailure& c : v.failed_clauses)
            out << " " << c.clause << "(+" << c.residual << ")";
        out << "\n";
    }
    return out.str();
}

ControlChoice fallback(const ControlChoice& last_safe, const WorldParams& params) {
    ControlChoice out = last_safe;
    out.branch = ControlBranch::kBrake;
    out.a = -params.b;
    out.d_flip = false;
    return out;
}

}  // namespace dwsafe
