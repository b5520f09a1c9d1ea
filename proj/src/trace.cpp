#include "dwsafe/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dwsafe {

namespace {

void append_double(std::string* out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    *out += buf;
}

void append_row(std::string* out, int step, double t_model, const RobotState& r,
                const std::vector<ObstacleState>& obstacles) {
    *out += std::to_string(step);
    *out += ',';
    append_double(out, t_model);
    const double fields[] = {r.p.x, r.p.y, r.v, r.a,   r.d.x, r.d.y,
                             r.omega, r.r_c, r.p_c.x, r.p_c.y, r.beta};
    for (double f : fields) {
        *out += ',';
        append_double(out, f);
    }
    for (const ObstacleState& o : obstacles) {
        const double ofields[] = {o.p.x, o.p.y, o.v.x, o.v.y, o.visible};
        for (double f : ofields) {
            *out += ',';
            append_double(out, f);
        }
    }
    *out += '\n';
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
    const size_t n_obstacles = trace.steps.empty() ? 0 : trace.steps.front().post_obstacles.size();
    std::string buf = "step,t_model,pr_x,pr_y,vr,ar,drx,dry,wr,rc,pcx,pcy,beta";
    for (size_t i = 1; i <= n_obstacles; ++i) {
        const std::string n = std::to_string(i);
        buf += ",po" + n + "_x,po" + n + "_y,vo" + n + "_x,vo" + n + "_y,visible_" + n;
    }
    buf += '\n';
    for (const TraceStep& s : trace.steps) {
        append_row(&buf, s.step, s.t_model, s.pre_robot, s.pre_obstacles);
        append_row(&buf, s.step, s.t_model, s.post_robot, s.post_obstacles);
    }
    out << buf;
}

bool write_trace_csv(const Trace& trace, const std::string& path, std::string* error) {
    std::ofstream out(path);
    if (!out) {
        if (error) *error = "cannot open " + path;
        return false;
    }
    write_trace_csv(trace, out);
    return static_cast<bool>(out);
}

namespace {

struct Row {
    int step;
    double t_model;
    RobotState robot;
    std::vector<ObstacleState> obstacles;
};

Row parse_row(const std::string& line, size_t n_obstacles, int lineno) {
    std::vector<double> vals;
    vals.reserve(13 + 5 * n_obstacles);
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw std::runtime_error("trace line " + std::to_string(lineno) + ": bad number '" +
                                     cell + "'");
        }
    }
    if (vals.size() != 13 + 5 * n_obstacles)
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(13 + 5 * n_obstacles) + " columns, got " +
                                 std::to_string(vals.size()));
    Row row;
    row.step = static_cast<int>(vals[0]);
    row.t_model = vals[1];
    RobotState& r = row.robot;
    r.p = {vals[2], vals[3]};
    r.v = vals[4];
    r.a = vals[5];
    r.d = {vals[6], vals[7]};
    r.omega = vals[8];
    r.r_c = vals[9];
    r.p_c = {vals[10], vals[11]};
    r.beta = vals[12];
    for (size_t i = 0; i < n_obstacles; ++i) {
        ObstacleState o;
        o.p = {vals[13 + 5 * i], vals[14 + 5 * i]};
        o.v = {vals[15 + 5 * i], vals[16 + 5 * i]};
        o.visible = vals[17 + 5 * i];
        row.obstacles.push_back(o);
    }
    return row;
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("trace: missing header row");
    size_t columns = 1;
    for (char c : header)
        if (c == ',') ++columns;
    if (columns < 13 || (columns - 13) % 5 != 0)
        throw std::runtime_error("trace: malformed header");
    const size_t n_obstacles = (columns - 13) / 5;

    Trace trace;
    std::string line;
    int lineno = 1;
    std::vector<Row> pending;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Row row = parse_row(line, n_obstacles, lineno);
        if (!pending.empty() && pending.front().step == row.step) {
            TraceStep step;
            step.step = row.step;
            step.t_model = row.t_model;
            step.pre_robot = pending.front().robot;
            step.pre_obstacles = std::move(pending.front().obstacles);
            step.post_robot = row.robot;
            step.post_obstacles = std::move(row.obstacles);
            trace.steps.push_back(std::move(step));
            pending.clear();
        } else {
            if (!pending.empty())
                throw std::runtime_error("trace line " + std::to_string(lineno) +
                                         ": unpaired sample for step " +
                                         std::to_string(pending.front().step));
            pending.push_back(std::move(row));
        }
    }
    if (!pending.empty()) throw std::runtime_error("trace: dangling pre sample at end of file");
    // Strictly increasing model time across steps.
    for (size_t i = 1; i < trace.steps.size(); ++i)
        if (!(trace.steps[i].t_model > trace.steps[i - 1].t_model))
            throw std::runtime_error("trace: model time must increase across steps");
    return trace;
}

bool read_trace_csv(const std::string& path, Trace* out, std::string* error) {
    std::ifstream in(path);
    if (!in) {
        if (error) *error = "cannot open " + path;
        return false;
    }
    try {
        *out = read_trace_csv(in);
    } catch (const std::exception& e) {
        if (error) *error = e.what();
        return false;
    }
    return true;
}

}  // namespace dwsafe
