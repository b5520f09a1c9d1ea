#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwsafe/controller.hpp"
#include "dwsafe/rng.hpp"
#include "dwsafe/scenario.hpp"
#include "dwsafe/trace.hpp"

namespace dwsafe {

// Adversarial obstacle control. Every emitted velocity respects the
// per-obstacle bound; the refined policy additionally honors the
// acceleration test v_o + a_o eps_o <= V.
class ObstaclePolicy {
public:
    ObstaclePolicy(ObstaclePolicyKind kind, const WorldParams& params);

    // One control opportunity (start of a cycle, or a mid-interval instant in
    // non-synchronized mode). Mutates obstacle velocities in place.
    void decide(std::span<ObstacleState> obstacles, const RobotState& robot, Rng& rng);

    // True when obstacle motion should use the refined (accelerating) flow.
    bool refined() const { return kind_ == ObstaclePolicyKind::kRefinedAccel; }

private:
    ObstaclePolicyKind kind_;
    const WorldParams* params_;
    bool aimed_ = false;  // head-on aims once, at the first opportunity
};

// Measurement step: position sampled uniformly in the Delta_p ball, velocity
// in [max(0, v - Delta_v), v + Delta_v]; exact when the refinements are off.
Observation observe(const RobotState& robot, std::span<const ObstacleState> obstacles,
                    const RefinementSet& refinements, const WorldParams& params, Rng& rng);

// Actuation step: effective acceleration delta_a * a with delta_a sampled in
// [Delta_a, 1], constant over the interval; exact when the refinement is off.
double actuate(const ControlChoice& choice, const RefinementSet& refinements,
               const WorldParams& params, Rng& rng);

struct RunOptions {
    bool record_trace = true;
    bool check_invariants = true;      // loop + differential invariants, per step
    bool check_monitor = false;        // relaxed controller monitor, per step
    bool check_monitor_strict = false;
    double near_miss_threshold = 1e-3;  // [m]
};

struct RunSummary {
    int steps = 0;
    double model_time = 0.0;
    // Continuous-time minima over the whole run (subsampled and locally
    // refined within each interval).
    double min_distance = std::numeric_limits<double>::infinity();
    double min_moving_distance = std::numeric_limits<double>::infinity();
    bool psi_violation = false;
    int violation_step = -1;
    std::string violation_what;
    int loop_invariant_failures = 0;
    int diff_invariant_failures = 0;
    int monitor_failures = 0;         // relaxed mode
    int monitor_failures_strict = 0;  // paper-literal mode
    int stops = 0;                    // stopping events (v hit 0 from motion)
    bool ended_stopped = false;
    bool near_miss = false;  // moving-distance minimum below the threshold
    RobotState final_robot;
    std::vector<ObstacleState> final_obstacles;
    // Liveness outcomes (volatile fields are only meaningful for the matching
    // goal kind).
    bool reached_goal = false;       // waypoint: stopped inside the region
    bool overshot_goal = false;      // waypoint: ever at or past p_g + Delta_g
    bool passed_intersection = false;
    bool deadline_met = true;
    double time_to_goal = -1.0;
};

struct RunResult {
    Trace trace;  // empty when record_trace is off
    RunSummary summary;
};

// Executes one scenario episode: obstacle control, measurement, robot
// control, actuation, and closed-form flow, repeated for ceil(horizon/eps)
// cycles (ending early only when a waypoint run stops inside its goal).
// Throws std::invalid_argument when the scenario fails validation.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

// Runs independent scenarios in parallel and returns results in input order.
// `threads` <= 0 picks hardware concurrency, capped by DWSAFE_THREADS.
std::vector<RunResult> run_batch(std::span<const Scenario> scenarios, const RunOptions& options,
                                 int threads = 0);

// Effective worker count honoring the DWSAFE_THREADS environment variable.
int effective_thread_count(int requested);

// Minimum robot-obstacle distance over one flow interval, refined around the
// coarse minimum; exposed for tests.
double interval_min_distance(const RobotState& start, double accel, const ObstacleState& obstacle,
                             bool refined_obstacle, double duration, bool moving_only);

}  // namespace dwsafe
