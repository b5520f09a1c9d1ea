#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwsafe/vec2.hpp"

namespace dwsafe {

// Tolerance for geometric link invariants (unit orientation, rigid-body link,
// curve-center consistency) and for monitor equality clauses.
inline constexpr double kGeomTol = 1e-9;

// Curve radius used to represent straight-line driving. Radii at or above
// this magnitude are integrated as exact translations.
inline constexpr double kStraightRadius = 1e9;

enum class SafetyMode {
    kStatic,
    kPassive,
    kPassiveFriendly,
    kPassiveOrientation,
};

enum class Refinement : unsigned {
    kActualAccel = 1u << 0,
    kTrajectoryDistance = 1u << 1,
    kLocationUncertainty = 1u << 2,
    kActuatorPerturbation = 1u << 3,
    kVelocityUncertainty = 1u << 4,
    kNonSync = 1u << 5,
    kMultiObstacle = 1u << 6,
};

// Set of refinements, stored as a bit mask.
struct RefinementSet {
    unsigned bits = 0;

    constexpr bool has(Refinement r) const { return (bits & static_cast<unsigned>(r)) != 0; }
    constexpr void add(Refinement r) { bits |= static_cast<unsigned>(r); }
    constexpr bool empty() const { return bits == 0; }
    friend constexpr bool operator==(const RefinementSet&, const RefinementSet&) = default;
};

std::string to_string(SafetyMode mode);
std::string to_string(const RefinementSet& refs);
bool parse_mode(const std::string& text, SafetyMode* out);
bool parse_refinement(const std::string& text, Refinement* out);

// Robot state: pose, translational/rotational velocity, orientation unit
// vector, current curve (signed radius and center), angular progress on the
// curve, and time since the last control decision.
struct RobotState {
    Vec2 p;             // position [m]
    double v = 0.0;     // translational velocity [m/s], >= 0
    double a = 0.0;     // commanded translational acceleration [m/s^2]
    Vec2 d{1.0, 0.0};   // orientation, unit vector
    double omega = 0.0; // rotational velocity [rad/s], omega * r_c == v
    double r_c = kStraightRadius;  // signed curve radius [m], > 0 counter-clockwise
    Vec2 p_c{0.0, kStraightRadius};  // curve center [m], consistent with the defaults
    double beta = 0.0;  // angular progress on the current curve [rad]
    double t = 0.0;     // time since last control decision [s]

    // Center implied by the orientation and signed radius: p + r_c * d^perp.
    Vec2 curve_center() const { return p + r_c * d.perp(); }

    // Violations of the state invariants (empty when consistent).
    std::vector<std::string> invariant_violations() const;
    bool invariants_hold() const { return invariant_violations().empty(); }
};

struct ObstacleState {
    Vec2 p;              // position [m]
    Vec2 v;              // velocity [m/s]
    double v_max = 0.0;  // this obstacle's speed bound V(i) [m/s]
    Vec2 d{1.0, 0.0};    // direction, unit vector (refined model only)
    double a = 0.0;      // acceleration along d [m/s^2] (refined model only)
    double visible = 1.0;  // > 0 iff visible at the last curve choice

    double speed() const { return norm_2(v); }
};

// Symbolic world bounds. Every bound is validated by validate().
struct WorldParams {
    double A = 1.0;        // max acceleration [m/s^2], >= 0
    double b = 1.0;        // min braking [m/s^2], > 0
    double b_o = 1.0;      // obstacle min braking [m/s^2], > 0
    double eps = 0.05;     // control cycle bound [s], > 0
    double eps_o = -1.0;   // obstacle control cycle bound [s]; < 0 means "use eps"
    double V = 1.0;        // max obstacle velocity [m/s], >= 0
    double Omega = 2.0;    // max rotational velocity [rad/s], >= 0
    double tau = 0.0;      // obstacle reaction time bound [s], >= 0
    double gamma = 3.141592653589793;  // angular width of the field of vision [rad], > 0
    double Delta_p = 0.0;  // location measurement bound [m], >= 0
    double Delta_a = 1.0;  // actuator damping floor, in (0, 1]
    double Delta_v = 0.0;  // velocity measurement bound [m/s], >= 0
    double V_min = 0.5;    // obstacle min velocity at intersections [m/s], > 0
    double V_g = 0.5;      // approach velocity near a waypoint [m/s], > 0
    double Delta_g = 0.5;  // half size of the goal region [m], > 0

    double obstacle_eps() const { return eps_o < 0.0 ? eps : eps_o; }

    std::vector<std::string> validate() const;

    // Applies "name=value" to the matching field; false if the name is unknown.
    bool set_field(const std::string& name, double value);
};

enum class ControlBranch {
    kBrake,
    kStay,
    kAccelerate,
};

std::string to_string(ControlBranch branch);

// Outcome of one controller decision.
struct ControlChoice {
    ControlBranch branch = ControlBranch::kBrake;
    double a = 0.0;
    double omega = 0.0;
    double r_c = kStraightRadius;
    Vec2 p_c;
    bool d_flip = false;  // turn in place while stopped (trajectory-distance model)
};

}  // namespace dwsafe
