#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dwsafe/types.hpp"

namespace dwsafe {

// One control cycle: samples taken immediately before and immediately after
// the controller ran. Robot and obstacle positions agree across the pair
// (control is instantaneous); the *pre* obstacle list carries the previous
// cycle's measurement, the *post* list the fresh one, so genuinely moving
// obstacles differ between the two samples.
struct TraceStep {
    int step = 0;
    double t_model = 0.0;  // model time of the control instant [s]
    RobotState pre_robot;
    RobotState post_robot;
    std::vector<ObstacleState> pre_obstacles;
    std::vector<ObstacleState> post_obstacles;
    ControlChoice choice;
    std::optional<bool> monitor_pass;  // filled when inline monitoring is on
};

struct Trace {
    std::vector<TraceStep> steps;
};

// CSV serialization: two rows per step (pre sample, then post sample),
// paired by equal step index. Columns, in order:
//   step,t_model,pr_x,pr_y,vr,ar,drx,dry,wr,rc,pcx,pcy,beta,
//   then per obstacle i: po<i>_x,po<i>_y,vo<i>_x,vo<i>_y,visible_<i>
// Floats carry 17 significant digits; the header row is mandatory.
void write_trace_csv(const Trace& trace, std::ostream& out);
bool write_trace_csv(const Trace& trace, const std::string& path, std::string* error);

// Throws std::runtime_error on malformed input.
Trace read_trace_csv(std::istream& in);
bool read_trace_csv(const std::string& path, Trace* out, std::string* error);

}  // namespace dwsafe
