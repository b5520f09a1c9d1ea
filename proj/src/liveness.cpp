#include "dwsafe/liveness.hpp"

#include <cmath>
#include <sstream>

#include "dwsafe/controller.hpp"

namespace dwsafe {

bool parse_liveness_kind(const std::string& text, LivenessKind* out) {
    if (text == "waypoint") *out = LivenessKind::kWaypoint;
    else if (text == "waypoint-deadline") *out = LivenessKind::kWaypointDeadline;
    else if (text == "intersection") *out = LivenessKind::kIntersection;
    else if (text == "intersection-deadline") *out = LivenessKind::kIntersectionDeadline;
    else return false;
    return true;
}

std::string to_string(LivenessKind kind) {
    switch (kind) {
        case LivenessKind::kWaypoint: return "waypoint";
        case LivenessKind::kWaypointDeadline: return "waypoint-deadline";
        case LivenessKind::kIntersection: return "intersection";
        case LivenessKind::kIntersectionDeadline: return "intersection-deadline";
    }
    return "?";
}

namespace {

struct GridPoint {
    Scenario scenario;
    bool feasible = true;
    std::string describe;
};

std::vector<GridPoint> waypoint_grid(int points, std::uint64_t seed, bool deadline) {
    const double bs[] = {0.5, 1.0, 2.0};
    const double As[] = {0.5, 1.0, 2.0};
    const double epss[] = {0.02, 0.05, 0.1};
    const double vgs[] = {0.3, 0.5, 1.0};
    const double dists[] = {3.0, 10.0};
    std::vector<GridPoint> grid;
    int emitted = 0;
    for (double b : bs)
        for (double A : As)
            for (double eps : epss)
                for (double vg : vgs)
                    for (double dist : dists) {
                        if (emitted >= points) goto done;
                        GridPoint pt;
                        Scenario& s = pt.scenario;
                        s.mode = SafetyMode::kPassive;
                        s.params.A = A;
                        s.params.b = b;
                        s.params.eps = eps;
                        s.params.V = 0.0;
                        s.params.V_g = vg;
                        s.params.Delta_g = 0.8 * (vg * eps + vg * vg / (2.0 * b));
                        s.robot.p = {0.0, 0.0};
                        s.robot.v = 0.0;
                        s.goal.kind = GoalSpec::Kind::kWaypoint;
                        s.goal.waypoint.p_g = dist;
                        s.seed = mix_seed(seed, grid.size());
                        const double travel = vg / A + dist / vg + vg / b;
                        s.horizon = 2.0 * travel + 10.0;
                        if (deadline) {
                            const double countdown = 1.25 * (travel + eps);
                            s.goal.waypoint.deadline = countdown;
                            pt.feasible = waypoint_deadline_feasible(
                                s.robot.p.x, 0.0, s.goal.waypoint, s.params, countdown);
                        }
                        std::ostringstream d;
                        d << "A=" << A << " b=" << b << " eps=" << eps << " V_g=" << vg
                          << " dist=" << dist;
                        pt.describe = d.str();
                        grid.push_back(std::move(pt));
                        ++emitted;
                    }
done:
    // A few deliberately infeasible rows: goal region too small for the
    // approach velocity.
    for (int i = 0; i < 3; ++i) {
        GridPoint pt;
        Scenario& s = pt.scenario;
        s.params.V = 0.0;
        s.params.V_g = 1.0;
        s.params.Delta_g = 0.25 * (s.params.V_g * s.params.eps +
                                   s.params.V_g * s.params.V_g / (2.0 * s.params.b));
        s.goal.kind = GoalSpec::Kind::kWaypoint;
        s.goal.waypoint.p_g = 5.0 + i;
        if (deadline) s.goal.waypoint.deadline = 60.0;
        pt.feasible = false;
        pt.describe = "goal region below the approach-velocity requirement";
        grid.push_back(std::move(pt));
    }
    return grid;
}

std::vector<GridPoint> intersection_grid(int points, std::uint64_t seed, bool deadline) {
    const double As[] = {0.5, 1.0, 2.0};
    const double bs[] = {0.5, 1.0, 2.0};
    const double epss[] = {0.02, 0.05, 0.1};
    const double vmins[] = {0.5, 1.0, 2.0};
    const double robot_dists[] = {5.0, 12.0};
    std::vector<GridPoint> grid;
    int emitted = 0;
    for (double A : As)
        for (double b : bs)
            for (double eps : epss)
                for (double vmin : vmins)
                    for (double rd : robot_dists) {
                        if (emitted >= points) goto done;
                        GridPoint pt;
                        Scenario& s = pt.scenario;
                        s.mode = SafetyMode::kPassive;
                        s.params.A = A;
                        s.params.b = b;
                        s.params.eps = eps;
                        s.params.V = 0.0;
                        s.params.V_min = vmin;
                        s.robot.p = {-rd, 0.0};
                        s.robot.p_c = s.robot.curve_center();
                        s.robot.v = 0.0;
                        s.goal.kind = GoalSpec::Kind::kIntersection;
                        s.goal.intersection.p_x = {0.0, 0.0};
                        s.goal.intersection.robot_x0 = -rd;
                        s.goal.intersection.obstacle_y0 = -3.0 - (emitted % 3) * 2.5;
                        s.goal.intersection.obstacle_v0 = vmin;
                        s.seed = mix_seed(seed, grid.size());
                        const double wait = -s.goal.intersection.obstacle_y0 / vmin;
                        const double cross = std::sqrt(2.0 * rd / A);
                        s.horizon = 2.0 * (wait + cross) + 20.0;
                        if (deadline) {
                            const double D = 2.0 * (eps + cross);
                            s.goal.intersection.deadline = D;
                            pt.feasible = intersection_deadline_feasible(
                                -rd, s.goal.intersection, s.params, D);
                        }
                        std::ostringstream d;
                        d << "A=" << A << " b=" << b << " eps=" << eps << " V_min=" << vmin
                          << " dist=" << rd;
                        pt.describe = d.str();
                        grid.push_back(std::move(pt));
                        ++emitted;
                    }
done:
    if (deadline) {
        // Infeasible: no driving time at all.
        GridPoint pt;
        Scenario& s = pt.scenario;
        s.robot.p = {-5.0, 0.0};
        s.robot.p_c = s.robot.curve_center();
        s.goal.kind = GoalSpec::Kind::kIntersection;
        s.goal.intersection.p_x = {0.0, 0.0};
        s.goal.intersection.robot_x0 = -5.0;
        s.goal.intersection.obstacle_y0 = -3.0;
        s.goal.intersection.obstacle_v0 = s.params.V_min;
        s.goal.intersection.deadline = s.params.eps;
        pt.feasible = false;
        pt.describe = "deadline leaves no driving time";
        grid.push_back(std::move(pt));
    }
    return grid;
}

}  // namespace

LivenessOutcome run_liveness_grid(LivenessKind kind, int points, std::uint64_t seed,
                                  int threads) {
    const bool deadline = kind == LivenessKind::kWaypointDeadline ||
                          kind == LivenessKind::kIntersectionDeadline;
    const bool waypoint =
        kind == LivenessKind::kWaypoint || kind == LivenessKind::kWaypointDeadline;
    std::vector<GridPoint> grid = waypoint ? waypoint_grid(points, seed, deadline)
                                           : intersection_grid(points, seed, deadline);
    LivenessOutcome outcome;
    RunOptions options;
    options.record_trace = false;
    options.check_invariants = false;

    std::vector<Scenario> to_run;
    std::vector<size_t> indices;
    for (size_t i = 0; i < grid.size(); ++i) {
        ++outcome.total;
        if (!grid[i].feasible) {
            ++outcome.skipped_infeasible;
            continue;
        }
        to_run.push_back(grid[i].scenario);
        indices.push_back(i);
    }
    const std::vector<RunResult> results = run_batch(to_run, options, threads);
    for (size_t j = 0; j < results.size(); ++j) {
        const RunSummary& s = results[j].summary;
        bool ok;
        if (waypoint)
            ok = s.reached_goal && !s.overshot_goal && !s.psi_violation;
        else
            ok = s.passed_intersection && !s.psi_violation && s.deadline_met;
        if (ok) {
            ++outcome.passed;
        } else {
            ++outcome.failed;
            outcome.failures.push_back(grid[indices[j]].describe + " -> " +
                                       (s.violation_what.empty() ? "goal not reached"
                                                                 : s.violation_what));
        }
    }
    return outcome;
}

std::string format_liveness_report(LivenessKind kind, const LivenessOutcome& outcome) {
    std::ostringstream out;
    out << to_string(kind) << ": " << outcome.passed << "/"
        << (outcome.total - outcome.skipped_infeasible) << " passed, "
        << outcome.skipped_infeasible << " skipped-infeasible\n";
    for (const std::string& f : outcome.failures) out << "  FAIL " << f << "\n";
    return out.str();
}

}  // namespace dwsafe
