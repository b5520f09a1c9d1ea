#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwsafe/trace.hpp"
#include "dwsafe/types.hpp"

namespace dwsafe {

struct ClauseFailure {
    std::string clause;  // e.g. "mon_a.safedist"
    double residual;     // how far from satisfaction, >= 0
};

// Verdict of the controller monitor on one sampled pre/post pair:
// pass <=> mon_o and mon_dyn and (mon_b or mon_s or mon_a).
struct MonitorVerdict {
    bool pass = false;
    std::optional<ControlBranch> satisfied_branch;  // mon_b/mon_s/mon_a
    std::vector<ClauseFailure> failed_clauses;
};

struct MonitorOptions {
    // Paper-literal mode keeps the obstacle-position equality clauses in the
    // braking and staying branches; they fail by construction on traces whose
    // obstacles moved between the two samples. Relaxed mode exempts them.
    bool strict_obstacle_equality = false;
    double tolerance = kGeomTol;  // absolute, for all equality clauses
};

MonitorVerdict eval_monitor(const RobotState& pre, const RobotState& post,
                            std::span<const ObstacleState> pre_obstacles,
                            std::span<const ObstacleState> post_obstacles,
                            const WorldParams& params, const MonitorOptions& options = {});

MonitorVerdict eval_monitor(const TraceStep& step, const WorldParams& params,
                            const MonitorOptions& options = {});

struct TraceComplianceReport {
    bool pass = true;
    int steps_checked = 0;
    int failures = 0;
    int first_failing_step = -1;
    std::vector<MonitorVerdict> verdicts;

    std::string to_text() const;
};

TraceComplianceReport check_trace(const Trace& trace, const WorldParams& params,
                                  const MonitorOptions& options = {});

// Fail-safe action: brake on the previous curve.
ControlChoice fallback(const ControlChoice& last_safe, const WorldParams& params);

}  // namespace dwsafe
