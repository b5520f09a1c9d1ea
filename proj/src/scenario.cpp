#include "dwsafe/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dwsafe/safety.hpp"

namespace dwsafe {

std::string to_string(ObstaclePolicyKind kind) {
    switch (kind) {
        case ObstaclePolicyKind::kRandom: return "random";
        case ObstaclePolicyKind::kHeadOn: return "headon";
        case ObstaclePolicyKind::kPursuit: return "pursuit";
        case ObstaclePolicyKind::kRefinedAccel: return "refined_accel";
        case ObstaclePolicyKind::kBlocker: return "blocker";
    }
    return "?";
}

bool parse_policy(const std::string& text, ObstaclePolicyKind* out) {
    if (text == "random") *out = ObstaclePolicyKind::kRandom;
    else if (text == "headon") *out = ObstaclePolicyKind::kHeadOn;
    else if (text == "pursuit") *out = ObstaclePolicyKind::kPursuit;
    else if (text == "refined_accel") *out = ObstaclePolicyKind::kRefinedAccel;
    else if (text == "blocker") *out = ObstaclePolicyKind::kBlocker;
    else return false;
    return true;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> out = s.params.validate();
    for (const auto& v : s.robot.invariant_violations()) out.push_back("robot: " + v);

    if (!(s.horizon > 0.0)) out.push_back("horizon must be > 0");
    if (!(s.margin_factor > 0.0 && s.margin_factor <= 1.0))
        out.push_back("margin_factor must be in (0, 1]");

    const bool multi = s.refinements.has(Refinement::kMultiObstacle);
    for (size_t i = 0; i < s.obstacles.size(); ++i) {
        const ObstacleState& o = s.obstacles[i];
        const std::string tag = "obstacle " + std::to_string(i + 1) + ": ";
        if (o.v_max < 0.0) out.push_back(tag + "v_max must be >= 0");
        if (norm_2(o.v) > o.v_max + kGeomTol) out.push_back(tag + "speed exceeds v_max");
        if (s.mode == SafetyMode::kStatic && o.v_max != 0.0)
            out.push_back(tag + "static mode requires stationary obstacles (v_max = 0)");
        if (s.mode != SafetyMode::kStatic && !multi && o.v_max != s.params.V)
            out.push_back(tag + "v_max must equal V without the multi_obstacle refinement");
        if (s.policy == ObstaclePolicyKind::kRefinedAccel &&
            std::abs(norm_2(o.d) - 1.0) > kGeomTol)
            out.push_back(tag + "d must be a unit vector for the refined policy");
    }

    // Mode initial condition.
    switch (s.mode) {
        case SafetyMode::kStatic:
        case SafetyMode::kPassive:
        case SafetyMode::kPassiveOrientation:
            if (s.robot.v != 0.0) out.push_back("initial condition: robot must start at rest");
            break;
        case SafetyMode::kPassiveFriendly: {
            if (s.robot.v != 0.0) out.push_back("initial condition: robot must start at rest");
            for (size_t i = 0; i < s.obstacles.size(); ++i) {
                const double margin = obstacle_stop_margin(s.obstacles[i].v_max, s.params);
                if (!(norm_inf(s.robot.p - s.obstacles[i].p) > margin))
                    out.push_back("initial condition: eta_obs violated for obstacle " +
                                  std::to_string(i + 1));
            }
            break;
        }
    }

    switch (s.goal.kind) {
        case GoalSpec::Kind::kWaypoint: {
            const WaypointGoal& g = s.goal.waypoint;
            const WorldParams& p = s.params;
            if (s.robot.v != 0.0) out.push_back("waypoint: robot must start at rest");
            if (!(s.robot.p.x < g.p_g - p.Delta_g))
                out.push_back("waypoint: robot must start before the goal region");
            if (!(p.A > 0.0)) out.push_back("waypoint: A must be > 0 to reach a goal");
            if (!(p.V_g * p.eps + p.V_g * p.V_g / (2.0 * p.b) < 2.0 * p.Delta_g))
                out.push_back("waypoint: approach velocity too fast for the goal region size");
            break;
        }
        case GoalSpec::Kind::kIntersection: {
            const IntersectionGoal& g = s.goal.intersection;
            if (!(g.obstacle_v0 >= s.params.V_min))
                out.push_back("intersection: obstacle must start at least at V_min");
            if (!(g.obstacle_y0 < g.p_x.y))
                out.push_back("intersection: obstacle must start before the crossing point");
            if (!(g.robot_v0 >= 0.0)) out.push_back("intersection: robot speed must be >= 0");
            break;
        }
        default: break;
    }
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok) {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::runtime_error("bad number: " + tok);
    return v;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    Scenario s;
    s.obstacles.clear();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool robot_rc_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (!tokenize(line).empty())
                throw std::runtime_error("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        auto keys = tokenize(line.substr(0, eq));
        auto vals = tokenize(line.substr(eq + 1));
        if (keys.size() != 1)
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected one key");
        const std::string& key = keys[0];
        auto need = [&](size_t n) {
            if (vals.size() != n)
                throw std::runtime_error("line " + std::to_string(lineno) + ": " + key +
                                         " expects " + std::to_string(n) + " value(s)");
        };
        if (key == "mode") {
            need(1);
            if (!parse_mode(vals[0], &s.mode))
                throw std::runtime_error("unknown mode: " + vals[0]);
        } else if (key == "refine") {
            for (const auto& v : vals) {
                Refinement r;
                if (!parse_refinement(v, &r)) throw std::runtime_error("unknown refinement: " + v);
                s.refinements.add(r);
            }
        } else if (key == "policy") {
            need(1);
            if (!parse_policy(vals[0], &s.policy))
                throw std::runtime_error("unknown policy: " + vals[0]);
        } else if (key == "seed") {
            need(1);
            s.seed = static_cast<std::uint64_t>(std::stoull(vals[0]));
        } else if (key == "horizon") {
            need(1);
            s.horizon = to_double(vals[0]);
        } else if (key == "dt") {
            need(1);
            if (vals[0] == "random") s.random_cycle_time = true;
            else if (vals[0] == "fixed") s.random_cycle_time = false;
            else throw std::runtime_error("dt must be 'random' or 'fixed'");
        } else if (key == "margin") {
            need(1);
            s.margin_factor = to_double(vals[0]);
        } else if (key.rfind("param.", 0) == 0) {
            need(1);
            if (!s.params.set_field(key.substr(6), to_double(vals[0])))
                throw std::runtime_error("unknown parameter: " + key.substr(6));
        } else if (key == "robot.p") {
            need(2);
            s.robot.p = {to_double(vals[0]), to_double(vals[1])};
        } else if (key == "robot.v") {
            need(1);
            s.robot.v = to_double(vals[0]);
        } else if (key == "robot.d") {
            need(2);
            s.robot.d = normalized({to_double(vals[0]), to_double(vals[1])});
        } else if (key == "robot.r_c") {
            need(1);
            s.robot.r_c = to_double(vals[0]);
            robot_rc_set = true;
        } else if (key == "obstacle") {
            if (vals.size() != 4 && vals.size() != 5)
                throw std::runtime_error("obstacle expects px py vx vy [v_max]");
            ObstacleState o;
            o.p = {to_double(vals[0]), to_double(vals[1])};
            o.v = {to_double(vals[2]), to_double(vals[3])};
            o.v_max = vals.size() == 5 ? to_double(vals[4]) : -1.0;  // resolved below
            if (norm_2(o.v) > 0.0) o.d = normalized(o.v);
            s.obstacles.push_back(o);
        } else if (key == "goal.point") {
            need(2);
            s.goal = GoalSpec::toward({to_double(vals[0]), to_double(vals[1])});
        } else if (key == "goal.waypoint") {
            need(1);
            s.goal.kind = GoalSpec::Kind::kWaypoint;
            s.goal.waypoint.p_g = to_double(vals[0]);
        } else if (key == "goal.waypoint.deadline") {
            need(1);
            s.goal.waypoint.deadline = to_double(vals[0]);
        } else if (key == "goal.intersection") {
            need(4);
            s.goal.kind = GoalSpec::Kind::kIntersection;
            s.goal.intersection.p_x = {to_double(vals[0]), to_double(vals[1])};
            s.goal.intersection.obstacle_y0 = to_double(vals[2]);
            s.goal.intersection.obstacle_v0 = to_double(vals[3]);
        } else if (key == "goal.intersection.deadline") {
            need(1);
            s.goal.intersection.deadline = to_double(vals[0]);
        } else {
            throw std::runtime_error("line " + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    if (!robot_rc_set) s.robot.r_c = kStraightRadius;
    s.robot.omega = s.robot.v / s.robot.r_c;
    s.robot.p_c = s.robot.curve_center();
    const double default_vmax = s.mode == SafetyMode::kStatic ? 0.0 : s.params.V;
    for (auto& o : s.obstacles)
        if (o.v_max < 0.0) o.v_max = default_vmax;
    if (s.goal.kind == GoalSpec::Kind::kIntersection) {
        s.goal.intersection.robot_x0 = s.robot.p.x;
        s.goal.intersection.robot_v0 = s.robot.v;
    }
    return s;
}

std::string scenario_to_text(const Scenario& s) {
    std::ostringstream out;
    out.precision(17);
    out << "mode = " << to_string(s.mode) << "\n";
    if (!s.refinements.empty()) out << "refine = " << to_string(s.refinements) << "\n";
    out << "policy = " << to_string(s.policy) << "\n";
    out << "seed = " << s.seed << "\n";
    out << "horizon = " << s.horizon << "\n";
    out << "dt = " << (s.random_cycle_time ? "random" : "fixed") << "\n";
    if (s.margin_factor != 1.0) out << "margin = " << s.margin_factor << "\n";
    const WorldParams def;
    const WorldParams& p = s.params;
    auto emit = [&](const char* name, double value, double defval) {
        if (value != defval) out << "param." << name << " = " << value << "\n";
    };
    emit("A", p.A, def.A);
    emit("b", p.b, def.b);
    emit("b_o", p.b_o, def.b_o);
    emit("eps", p.eps, def.eps);
    emit("eps_o", p.eps_o, def.eps_o);
    emit("V", p.V, def.V);
    emit("Omega", p.Omega, def.Omega);
    emit("tau", p.tau, def.tau);
    emit("gamma", p.gamma, def.gamma);
    emit("Delta_p", p.Delta_p, def.Delta_p);
    emit("Delta_a", p.Delta_a, def.Delta_a);
    emit("Delta_v", p.Delta_v, def.Delta_v);
    emit("V_min", p.V_min, def.V_min);
    emit("V_g", p.V_g, def.V_g);
    emit("Delta_g", p.Delta_g, def.Delta_g);
    out << "robot.p = " << s.robot.p.x << " " << s.robot.p.y << "\n";
    out << "robot.v = " << s.robot.v << "\n";
    out << "robot.d = " << s.robot.d.x << " " << s.robot.d.y << "\n";
    out << "robot.r_c = " << s.robot.r_c << "\n";
    for (const auto& o : s.obstacles)
        out << "obstacle = " << o.p.x << " " << o.p.y << " " << o.v.x << " " << o.v.y << " "
            << o.v_max << "\n";
    switch (s.goal.kind) {
        case GoalSpec::Kind::kPoint:
            out << "goal.point = " << s.goal.point.x << " " << s.goal.point.y << "\n";
            break;
        case GoalSpec::Kind::kWaypoint:
            out << "goal.waypoint = " << s.goal.waypoint.p_g << "\n";
            if (s.goal.waypoint.deadline)
                out << "goal.waypoint.deadline = " << *s.goal.waypoint.deadline << "\n";
            break;
        case GoalSpec::Kind::kIntersection:
            out << "goal.intersection = " << s.goal.intersection.p_x.x << " "
                << s.goal.intersection.p_x.y << " " << s.goal.intersection.obstacle_y0 << " "
                << s.goal.intersection.obstacle_v0 << "\n";
            if (s.goal.intersection.deadline)
                out << "goal.intersection.deadline = " << *s.goal.intersection.deadline << "\n";
            break;
        default: break;
    }
    return out.str();
}

bool load_scenario(const std::string& path, Scenario* out, std::string* error) {
    std::ifstream in(path);
    if (!in) {
        if (error) *error = "cannot open " + path;
        return false;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        *out = parse_scenario_text(buf.str());
    } catch (const std::exception& e) {
        if (error) *error = e.what();
        return false;
    }
    return true;
}

bool save_scenario(const Scenario& s, const std::string& path, std::string* error) {
    std::ofstream out(path);
    if (!out) {
        if (error) *error = "cannot open " + path;
        return false;
    }
    out << scenario_to_text(s);
    return static_cast<bool>(out);
}

}  // namespace dwsafe
