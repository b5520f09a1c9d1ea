#include "dwsafe/simulate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "dwsafe/dynamics.hpp"
#include "dwsafe/monitor.hpp"
#include "dwsafe/safety.hpp"

namespace dwsafe {

namespace {

constexpr double kCollisionTol = 1e-9;  // representation noise around an exact crossing
// An admissible adversary may close the gap to exactly 0 at the very instant
// the robot's velocity reaches 0 (contact while stopped is allowed). A
// genuine active collision passes through the contact with macroscopic
// speed; requiring it separates the two within float precision.
constexpr double kMovingSpeedFloor = 1e-6;  // [m/s]
constexpr int kCoarseSamples = 8;
constexpr double kRefineBelow = 0.05;  // [m]
constexpr int kNonSyncMaxDecisions = 8;

Vec2 unit_or_zero(const Vec2& v) {
    const double n = norm_2(v);
    return n > 0.0 ? Vec2{v.x / n, v.y / n} : Vec2{0.0, 0.0};
}

}  // namespace

ObstaclePolicy::ObstaclePolicy(ObstaclePolicyKind kind, const WorldParams& params)
    : kind_(kind), params_(&params) {}

void ObstaclePolicy::decide(std::span<ObstacleState> obstacles, const RobotState& robot,
                            Rng& rng) {
    for (ObstacleState& o : obstacles) {
        switch (kind_) {
            case ObstaclePolicyKind::kRandom: {
                const double angle = rng.uniform(0.0, 2.0 * M_PI);
                const double speed = o.v_max * rng.next_double();
                o.v = speed * Vec2{std::cos(angle), std::sin(angle)};
                break;
            }
            case ObstaclePolicyKind::kHeadOn:
                // Aims once and then approaches on that straight line.
                if (!aimed_) o.v = o.v_max * unit_or_zero(robot.p - o.p);
                break;
            case ObstaclePolicyKind::kPursuit:
                o.v = o.v_max * unit_or_zero(robot.p - o.p);
                break;
            case ObstaclePolicyKind::kBlocker: {
                const double lead = std::max(0.5, robot.v);
                o.v = o.v_max * unit_or_zero(robot.p + lead * robot.d - o.p);
                break;
            }
            case ObstaclePolicyKind::kRefinedAccel: {
                if (rng.next_double() < 0.3) {
                    const double turn = rng.uniform(-0.6, 0.6);
                    o.d = normalized(rotated(o.d, turn));
                }
                const double eps_o = params_->obstacle_eps();
                const double speed = o.speed();
                o.a = rng.uniform(-speed / eps_o, (o.v_max - speed) / eps_o);
                o.v = speed * o.d;
                break;
            }
        }
        if (norm_2(o.v) > o.v_max) o.v = o.v_max * unit_or_zero(o.v);
    }
    aimed_ = true;
}

Observation observe(const RobotState& robot, std::span<const ObstacleState> obstacles,
                    const RefinementSet& refinements, const WorldParams& params, Rng& rng) {
    Observation obs;
    obs.robot = robot;
    obs.v_hat = robot.v;
    obs.obstacles = obstacles;
    if (refinements.has(Refinement::kLocationUncertainty) && params.Delta_p > 0.0) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double radius = params.Delta_p * std::sqrt(rng.next_double());
        obs.robot.p += radius * Vec2{std::cos(angle), std::sin(angle)};
        obs.robot.p_c = obs.robot.curve_center();
    }
    if (refinements.has(Refinement::kVelocityUncertainty)) {
        const double lo = std::max(0.0, robot.v - params.Delta_v);
        obs.v_hat = rng.uniform(lo, robot.v + params.Delta_v);
    }
    return obs;
}

double actuate(const ControlChoice& choice, const RefinementSet& refinements,
               const WorldParams& params, Rng& rng) {
    if (!refinements.has(Refinement::kActuatorPerturbation)) return choice.a;
    const double damping = rng.uniform(params.Delta_a, 1.0);
    return damping * choice.a;
}

int effective_thread_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* cap_text = std::getenv("DWSAFE_THREADS")) {
        const int cap = std::atoi(cap_text);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

namespace {

struct IntervalMinima {
    double all = std::numeric_limits<double>::infinity();
    double moving = std::numeric_limits<double>::infinity();
    double argmin_t = 0.0;  // time of the moving minimum
};

Vec2 obstacle_pos_at(const ObstacleState& o, bool refined, double t) {
    if (!refined) return o.p + t * o.v;
    return flow_refined_obstacle(o, t).p;
}

// Minimum robot-obstacle distance over [0, duration], golden-section refined
// around the coarse minimum once it gets small.
IntervalMinima interval_minima(const RobotState& start, double accel, const ObstacleState& obstacle,
                               bool refined_obstacle, double duration) {
    IntervalMinima out;
    const bool moving = start.v > 0.0 || accel > 0.0;
    if (duration <= 0.0) {
        out.all = norm_2(start.p - obstacle.p);
        if (moving) out.moving = out.all;
        return out;
    }
    const double omega0 = start.v / start.r_c;
    auto dist_at = [&](double t) {
        const Vec2 rp = flow_robot(start, accel, omega0, start.r_c, t).post.p;
        return norm_2(rp - obstacle_pos_at(obstacle, refined_obstacle, t));
    };

    double best_t = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kCoarseSamples; ++k) {
        const double t = duration * k / kCoarseSamples;
        const double d = dist_at(t);
        if (d < best) {
            best = d;
            best_t = t;
        }
    }
    out.all = best;
    if (!moving) return out;  // a parked robot never collides actively

    if (best < kRefineBelow) {
        const double step = duration / kCoarseSamples;
        double lo = std::max(0.0, best_t - step);
        double hi = std::min(duration, best_t + step);
        constexpr double kPhi = 0.6180339887498949;
        double x1 = hi - kPhi * (hi - lo);
        double x2 = lo + kPhi * (hi - lo);
        double f1 = dist_at(x1);
        double f2 = dist_at(x2);
        for (int it = 0; it < 48; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kPhi * (hi - lo);
                f1 = dist_at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kPhi * (hi - lo);
                f2 = dist_at(x2);
            }
        }
        if (const double refined = std::min(f1, f2); refined < best) {
            best = refined;
            best_t = f1 < f2 ? x1 : x2;
        }
        out.all = std::min(out.all, best);
    }
    out.moving = best;
    out.argmin_t = best_t;
    return out;
}

// Applies a control choice: actuators change, the world does not move.
RobotState apply_choice(const RobotState& robot, const ControlChoice& choice) {
    RobotState post = robot;
    post.a = choice.a;
    post.t = 0.0;
    switch (choice.branch) {
        case ControlBranch::kBrake:
            break;  // brake on the previous curve, everything else untouched
        case ControlBranch::kStay:
            post.omega = 0.0;
            if (choice.d_flip) {
                post.d = -post.d;
                post.r_c = choice.r_c;
                post.p_c = post.curve_center();
                post.beta = 0.0;
            }
            break;
        case ControlBranch::kAccelerate:
            post.omega = choice.omega;
            post.r_c = choice.r_c;
            post.p_c = post.curve_center();
            post.beta = 0.0;  // angular progress restarts with the new curve
            break;
    }
    return post;
}

class EpisodeRunner {
public:
    EpisodeRunner(const Scenario& scenario, const RunOptions& options)
        : scenario_(scenario),
          options_(options),
          rng_(scenario.seed),
          policy_(scenario.policy, scenario_.params),
          candidates_(CandidateSet::default_grid(scenario.params)) {}

    RunResult run_episode() {
        const auto violations = validate_scenario(scenario_);
        if (!violations.empty())
            throw std::invalid_argument("invalid scenario: " + violations.front());
        switch (scenario_.goal.kind) {
            case GoalSpec::Kind::kWaypoint: return run_waypoint();
            case GoalSpec::Kind::kIntersection: return run_intersection();
            default: return run_planar();
        }
    }

private:
    void note_violation(RunSummary* summary, int step, const std::string& what) {
        if (summary->psi_violation) return;
        summary->psi_violation = true;
        summary->violation_step = step;
        summary->violation_what = what;
    }

    // Tracks distance minima over one flow segment and applies the mode's
    // safety condition.
    void scan_segment(const RobotState& seg_start, double accel, double duration, int step,
                      RunSummary* summary) {
        const bool refined = policy_.refined();
        for (const ObstacleState& o : obstacles_) {
            const IntervalMinima m = interval_minima(seg_start, accel, o, refined, duration);
            summary->min_distance = std::min(summary->min_distance, m.all);
            summary->min_moving_distance = std::min(summary->min_moving_distance, m.moving);
            const double v_at_min = std::max(0.0, seg_start.v + accel * m.argmin_t);
            if (m.moving <= kCollisionTol && v_at_min > kMovingSpeedFloor) {
                bool blamed = true;
                if (scenario_.mode == SafetyMode::kPassiveOrientation) {
                    const RobotState at = flow_robot(seg_start, accel, seg_start.v / seg_start.r_c,
                                                     seg_start.r_c, m.argmin_t)
                                              .post;
                    blamed = o.visible > 0.0 || std::abs(at.beta) >= scenario_.params.gamma;
                }
                if (blamed) note_violation(summary, step, "contact while moving");
            }
            if (scenario_.mode == SafetyMode::kStatic && m.all <= kCollisionTol)
                note_violation(summary, step, "contact with stationary obstacle");
        }
    }

    void check_boundary(RunSummary* summary) {
        if (!options_.check_invariants) return;
        if (!loop_invariant(scenario_.mode, scenario_.refinements, robot_, obstacles_,
                            scenario_.params))
            ++summary->loop_invariant_failures;
    }

    void check_stop_event(int step, RunSummary* summary) {
        ++summary->stops;
        if (scenario_.mode != SafetyMode::kPassiveFriendly) return;
        for (const ObstacleState& o : obstacles_) {
            if (!(norm_inf(robot_.p - o.p) > obstacle_stop_margin(o.v_max, scenario_.params))) {
                note_violation(summary, step, "no obstacle room left at robot stop");
                return;
            }
        }
    }

    RunResult run_planar() {
        RunResult result;
        RunSummary& summary = result.summary;
        const WorldParams& params = scenario_.params;
        robot_ = scenario_.robot;
        obstacles_ = scenario_.obstacles;
        if (scenario_.mode == SafetyMode::kPassiveOrientation) {
            // The initial pose counts as a fresh curve choice.
            for (ObstacleState& o : obstacles_)
                o.visible = visibility(robot_, o.p, params.gamma) ? 1.0 : -1.0;
        }
        prev_measurement_ = obstacles_;
        const bool nonsync = scenario_.refinements.has(Refinement::kNonSync);

        const int cycles = static_cast<int>(std::ceil(scenario_.horizon / params.eps));
        check_boundary(&summary);
        for (int step = 0; step < cycles; ++step) {
            // ctrl_o; observe; ctrl_r
            policy_.decide(obstacles_, robot_, rng_);
            const Observation obs =
                observe(robot_, obstacles_, scenario_.refinements, params, rng_);
            const ControlChoice choice =
                decide(scenario_.mode, scenario_.refinements, obs, params, candidates_,
                       scenario_.goal, scenario_.margin_factor);
            const RobotState pre_robot = robot_;
            const RobotState post_robot = apply_choice(robot_, choice);
            if (choice.branch == ControlBranch::kAccelerate &&
                scenario_.mode == SafetyMode::kPassiveOrientation) {
                for (ObstacleState& o : obstacles_)
                    o.visible = visibility(obs.robot, o.p, params.gamma) ? 1.0 : -1.0;
            }

            if (options_.check_monitor) {
                if (!eval_monitor(pre_robot, post_robot, prev_measurement_, obstacles_, params)
                         .pass)
                    ++summary.monitor_failures;
            }
            if (options_.check_monitor_strict) {
                MonitorOptions mon;
                mon.strict_obstacle_equality = true;
                if (!eval_monitor(pre_robot, post_robot, prev_measurement_, obstacles_, params,
                                  mon)
                         .pass)
                    ++summary.monitor_failures_strict;
            }
            if (options_.record_trace) {
                TraceStep ts;
                ts.step = step;
                ts.t_model = model_time_;
                ts.pre_robot = pre_robot;
                ts.post_robot = post_robot;
                ts.pre_obstacles = prev_measurement_;
                ts.post_obstacles = obstacles_;
                ts.choice = choice;
                result.trace.steps.push_back(std::move(ts));
            }
            prev_measurement_ = obstacles_;

            // dyn for a sampled duration <= eps, with obstacle decision
            // instants inside the interval in non-synchronized mode.
            const double dt =
                scenario_.random_cycle_time ? params.eps * (1.0 - rng_.next_double()) : params.eps;
            double effective_a = actuate(choice, scenario_.refinements, params, rng_);
            if (post_robot.v == 0.0 && effective_a < 0.0) effective_a = 0.0;
            robot_ = post_robot;

            std::array<double, kNonSyncMaxDecisions + 2> marks{};
            int n_marks = 0;
            marks[n_marks++] = 0.0;
            if (nonsync) {
                const int m = static_cast<int>(rng_.below(kNonSyncMaxDecisions + 1));
                for (int j = 0; j < m; ++j) marks[n_marks++] = rng_.uniform(0.0, dt);
                std::sort(marks.begin() + 1, marks.begin() + n_marks);
            }
            marks[n_marks++] = dt;

            bool stopped_this_cycle = false;
            for (int seg = 0; seg + 1 < n_marks; ++seg) {
                if (seg > 0) policy_.decide(obstacles_, robot_, rng_);
                const double seg_len = marks[seg + 1] - marks[seg];
                if (seg_len <= 0.0) continue;
                const RobotState seg_start = robot_;
                const FlowResult flow = flow_robot(seg_start, effective_a,
                                                   seg_start.v / seg_start.r_c, seg_start.r_c,
                                                   seg_len);
                scan_segment(seg_start, effective_a, flow.elapsed, step, &summary);
                if (options_.check_invariants) scratch_obstacles_ = obstacles_;
                for (ObstacleState& o : obstacles_)
                    o = policy_.refined() ? flow_refined_obstacle(o, flow.elapsed)
                                          : flow_obstacle(o, flow.elapsed);
                if (options_.check_invariants) {
                    const DiffInvariantReport report = check_differential_invariants(
                        seg_start, flow.post, effective_a, flow.elapsed, scratch_obstacles_,
                        obstacles_);
                    if (!report.all_ok()) ++summary.diff_invariant_failures;
                }
                robot_ = flow.post;
                model_time_ += flow.elapsed;
                if (flow.stopped_at && seg_start.v > 0.0) {
                    stopped_this_cycle = true;
                    break;  // the evolution domain ends at the stop
                }
            }
            if (stopped_this_cycle) check_stop_event(step, &summary);
            check_boundary(&summary);
            summary.steps = step + 1;
        }
        summary.near_miss = summary.min_moving_distance < options_.near_miss_threshold;
        summary.model_time = model_time_;
        summary.ended_stopped = robot_.v == 0.0;
        summary.final_robot = robot_;
        summary.final_obstacles = obstacles_;
        return result;
    }

    RunResult run_waypoint() {
        RunResult result;
        RunSummary& summary = result.summary;
        const WorldParams& params = scenario_.params;
        const WaypointGoal& goal = scenario_.goal.waypoint;
        double p = scenario_.robot.p.x;
        double v = scenario_.robot.v;
        std::optional<double> countdown = goal.deadline;
        const int cycles = static_cast<int>(std::ceil(scenario_.horizon / params.eps));
        const double region_lo = goal.p_g - params.Delta_g;
        const double region_hi = goal.p_g + params.Delta_g;

        for (int step = 0; step < cycles; ++step) {
            const ControlChoice choice = waypoint_decide(p, v, goal, params, countdown);
            if (options_.record_trace) {
                TraceStep ts;
                ts.step = step;
                ts.t_model = model_time_;
                ts.pre_robot.p = {p, 0.0};
                ts.pre_robot.v = v;
                ts.post_robot = ts.pre_robot;
                ts.post_robot.a = choice.a;
                ts.choice = choice;
                result.trace.steps.push_back(std::move(ts));
            }
            const double dt =
                scenario_.random_cycle_time ? params.eps * (1.0 - rng_.next_double()) : params.eps;
            double a = choice.a;
            if (v == 0.0 && a < 0.0) a = 0.0;
            double T = dt;
            if (a < 0.0 && v + a * dt < 0.0) T = -v / a;
            p += v * T + 0.5 * a * T * T;
            v = std::max(0.0, v + a * T);
            model_time_ += dt;  // the robot may park for the rest of the cycle
            if (countdown) *countdown -= dt;
            summary.steps = step + 1;

            if (p >= region_hi) {
                summary.overshot_goal = true;
                note_violation(&summary, step, "exited the goal region");
            }
            if (countdown && *countdown <= 0.0 && !(v == 0.0 && p > region_lo && p < region_hi)) {
                summary.deadline_met = false;
                note_violation(&summary, step, "deadline expired before stopping inside the goal");
            }
            if (v == 0.0 && p > region_lo && p < region_hi) {
                summary.reached_goal = true;
                if (summary.time_to_goal < 0.0) summary.time_to_goal = model_time_;
                break;  // stays stopped inside from here on
            }
        }
        summary.model_time = model_time_;
        summary.ended_stopped = v == 0.0;
        summary.final_robot.p = {p, 0.0};
        summary.final_robot.v = v;
        return result;
    }

    RunResult run_intersection() {
        RunResult result;
        RunSummary& summary = result.summary;
        const WorldParams& params = scenario_.params;
        const IntersectionGoal& goal = scenario_.goal.intersection;
        const bool deadline_variant = goal.deadline.has_value();
        double p_r = scenario_.robot.p.x;
        double v_r = scenario_.robot.v;
        double p_o = goal.obstacle_y0;
        double v_o = goal.obstacle_v0;
        double timer = deadline_variant ? std::min(0.0, (p_o - goal.p_x.y) / params.V_min) : 0.0;
        const int cycles = static_cast<int>(std::ceil(scenario_.horizon / params.eps));

        for (int step = 0; step < cycles; ++step) {
            const double a_o = rng_.uniform(-params.b, params.A);
            const ControlChoice choice =
                intersection_decide(p_r, v_r, p_o, v_o, goal, params, deadline_variant);
            const double dt =
                scenario_.random_cycle_time ? params.eps * (1.0 - rng_.next_double()) : params.eps;
            double a = choice.a;
            if (v_r == 0.0 && a < 0.0) a = 0.0;

            const double p_r0 = p_r, v_r0 = v_r, p_o0 = p_o, v_o0 = v_o;
            double T = dt;  // robot motion time (stop clipping)
            if (a < 0.0 && v_r + a * dt < 0.0) T = -v_r / a;
            p_r += v_r * T + 0.5 * a * T * T;
            v_r = std::max(0.0, v_r + a * T);

            // Obstacle flow with the v_o >= V_min floor.
            double t_floor = dt;
            if (a_o < 0.0 && v_o + a_o * dt < params.V_min)
                t_floor = std::max(0.0, (params.V_min - v_o) / a_o);
            p_o += v_o * t_floor + 0.5 * a_o * t_floor * t_floor;
            v_o = std::max(params.V_min, v_o + a_o * t_floor);
            p_o += v_o * (dt - t_floor);

            if (v_r0 > 0.0 || a > 0.0) {
                // Continuous minimum of the embedded 2-D separation between
                // the agents' distances to the crossing point.
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k <= kCoarseSamples; ++k) {
                    const double t = T * k / kCoarseSamples;
                    const double rx = p_r0 + v_r0 * t + 0.5 * a * t * t;
                    double oy;
                    if (t <= t_floor)
                        oy = p_o0 + v_o0 * t + 0.5 * a_o * t * t;
                    else
                        oy = p_o0 + v_o0 * t_floor + 0.5 * a_o * t_floor * t_floor +
                             v_o * (t - t_floor);
                    best = std::min(best, std::hypot(rx - goal.p_x.x, oy - goal.p_x.y));
                }
                summary.min_moving_distance = std::min(summary.min_moving_distance, best);
                summary.min_distance = std::min(summary.min_distance, best);
                if (best <= kCollisionTol)
                    note_violation(&summary, step, "simultaneous occupancy of the crossing");
            }

            model_time_ += dt;
            timer += dt;
            summary.steps = step + 1;
            if (p_r > goal.p_x.x && !summary.passed_intersection) {
                summary.passed_intersection = true;
                summary.time_to_goal = model_time_;
            }
            if (deadline_variant && timer >= *goal.deadline && !summary.passed_intersection) {
                summary.deadline_met = false;
                note_violation(&summary, step, "deadline expired before crossing");
            }
            if (summary.passed_intersection && p_r > goal.p_x.x + 5.0) break;
        }
        summary.model_time = model_time_;
        summary.ended_stopped = v_r == 0.0;
        summary.final_robot.p = {p_r, 0.0};
        summary.final_robot.v = v_r;
        return result;
    }

    Scenario scenario_;
    RunOptions options_;
    Rng rng_;
    ObstaclePolicy policy_;
    CandidateSet candidates_;
    RobotState robot_;
    std::vector<ObstacleState> obstacles_;
    std::vector<ObstacleState> prev_measurement_;
    std::vector<ObstacleState> scratch_obstacles_;
    double model_time_ = 0.0;
};

}  // namespace

double interval_min_distance(const RobotState& start, double accel, const ObstacleState& obstacle,
                             bool refined_obstacle, double duration, bool moving_only) {
    const IntervalMinima m = interval_minima(start, accel, obstacle, refined_obstacle, duration);
    return moving_only ? m.moving : m.all;
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
    EpisodeRunner runner(scenario, options);
    return runner.run_episode();
}

std::vector<RunResult> run_batch(std::span<const Scenario> scenarios, const RunOptions& options,
                                 int threads) {
    std::vector<RunResult> results(scenarios.size());
    const int workers = static_cast<int>(std::min<size_t>(
        static_cast<size_t>(effective_thread_count(threads)), std::max<size_t>(scenarios.size(), 1)));
    if (workers <= 1) {
        for (size_t i = 0; i < scenarios.size(); ++i) results[i] = run(scenarios[i], options);
        return results;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < scenarios.size(); i = next.fetch_add(1))
            results[i] = run(scenarios[i], options);
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace dwsafe
