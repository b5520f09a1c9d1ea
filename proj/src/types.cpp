#include "dwsafe/types.hpp"

#include <cmath>
#include <sstream>

namespace dwsafe {

std::string to_string(SafetyMode mode) {
    switch (mode) {
        case SafetyMode::kStatic: return "static";
        case SafetyMode::kPassive: return "passive";
        case SafetyMode::kPassiveFriendly: return "friendly";
        case SafetyMode::kPassiveOrientation: return "orientation";
    }
    return "?";
}

bool parse_mode(const std::string& text, SafetyMode* out) {
    if (text == "static") *out = SafetyMode::kStatic;
    else if (text == "passive") *out = SafetyMode::kPassive;
    else if (text == "friendly" || text == "passive_friendly") *out = SafetyMode::kPassiveFriendly;
    else if (text == "orientation" || text == "passive_orientation")
        *out = SafetyMode::kPassiveOrientation;
    else return false;
    return true;
}

namespace {

struct RefinementName {
    Refinement value;
    const char* name;
};

constexpr RefinementName kRefinementNames[] = {
    {Refinement::kActualAccel, "actual_accel"},
    {Refinement::kTrajectoryDistance, "trajectory_distance"},
    {Refinement::kLocationUncertainty, "location_uncertainty"},
    {Refinement::kActuatorPerturbation, "actuator_perturbation"},
    {Refinement::kVelocityUncertainty, "velocity_uncertainty"},
    {Refinement::kNonSync, "non_sync"},
    {Refinement::kMultiObstacle, "multi_obstacle"},
};

}  // namespace

std::string to_string(const RefinementSet& refs) {
    std::string out;
    for (const auto& [value, name] : kRefinementNames) {
        if (refs.has(value)) {
            if (!out.empty()) out += ' ';
            out += name;
        }
    }
    return out;
}

bool parse_refinement(const std::string& text, Refinement* out) {
    for (const auto& [value, name] : kRefinementNames) {
        if (text == name) {
            *out = value;
            return true;
        }
    }
    return false;
}

std::string to_string(ControlBranch branch) {
    switch (branch) {
        case ControlBranch::kBrake: return "brake";
        case ControlBranch::kStay: return "stay";
        case ControlBranch::kAccelerate: return "accelerate";
    }
    return "?";
}

std::vector<std::string> RobotState::invariant_violations() const {
    std::vector<std::string> out;
    if (!is_finite(p) || !std::isfinite(v) || !is_finite(d)) out.push_back("non-finite state");
    if (v < 0.0) out.push_back("v must be >= 0");
    if (std::abs(norm_2(d) - 1.0) > kGeomTol) out.push_back("d must be a unit vector");
    if (r_c == 0.0) out.push_back("r_c must be nonzero while a curve is active");
    if (std::abs(r_c * omega - v) > kGeomTol * std::max(1.0, std::abs(v)))
        out.push_back("rigid-body link r_c * omega = v violated");
    const Vec2 center = curve_center();
    if (norm_2(center - p_c) > kGeomTol * std::max(1.0, std::abs(r_c)))
        out.push_back("curve center inconsistent with orientation and radius");
    return out;
}

std::vector<std::string> WorldParams::validate() const {
    std::vector<std::string> out;
    auto req = [&out](bool ok, const char* msg) {
        if (!ok) out.push_back(msg);
    };
    req(A >= 0.0, "A must be >= 0");
    req(b > 0.0, "b must be > 0");
    req(b_o > 0.0, "b_o must be > 0");
    req(eps > 0.0, "eps must be > 0");
    req(V >= 0.0, "V must be >= 0");
    req(Omega >= 0.0, "Omega must be >= 0");
    req(tau >= 0.0, "tau must be >= 0");
    req(gamma > 0.0, "gamma must be > 0");
    req(Delta_p >= 0.0, "Delta_p must be >= 0");
    req(Delta_a > 0.0 && Delta_a <= 1.0, "Delta_a must be in (0, 1]");
    req(Delta_v >= 0.0, "Delta_v must be >= 0");
    req(V_min > 0.0, "V_min must be > 0");
    req(V_g > 0.0, "V_g must be > 0");
    req(Delta_g > 0.0, "Delta_g must be > 0");
    return out;
}

bool WorldParams::set_field(const std::string& name, double value) {
    if (name == "A") A = value;
    else if (name == "b") b = value;
    else if (name == "b_o") b_o = value;
    else if (name == "eps") eps = value;
    else if (name == "eps_o") eps_o = value;
    else if (name == "V") V = value;
    else if (name == "Omega") Omega = value;
    else if (name == "tau") tau = value;
    else if (name == "gamma") gamma = value;
    else if (name == "Delta_p") Delta_p = value;
    else if (name == "Delta_a") Delta_a = value;
    else if (name == "Delta_v") Delta_v = value;
    else if (name == "V_min") V_min = value;
    else if (name == "V_g") V_g = value;
    else if (name == "Delta_g") Delta_g = value;
    else return false;
    return true;
}

}  // namespace dwsafe
