#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwsafe/simulate.hpp"

namespace dwsafe {

enum class LivenessKind {
    kWaypoint,
    kWaypointDeadline,
    kIntersection,
    kIntersectionDeadline,
};

bool parse_liveness_kind(const std::string& text, LivenessKind* out);
std::string to_string(LivenessKind kind);

struct LivenessOutcome {
    int total = 0;
    int passed = 0;
    int failed = 0;
    int skipped_infeasible = 0;
    std::vector<std::string> failures;

    bool all_passed() const { return failed == 0; }
};

// Builds a deterministic parameter grid of `points` feasible configurations
// (plus a handful of infeasible rows, reported as skipped) and runs each
// episode, checking the respective reach/stop or crossing condition.
LivenessOutcome run_liveness_grid(LivenessKind kind, int points, std::uint64_t seed,
                                  int threads = 0);

std::string format_liveness_report(LivenessKind kind, const LivenessOutcome& outcome);

}  // namespace dwsafe
