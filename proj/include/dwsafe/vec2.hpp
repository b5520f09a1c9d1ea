#pragma once

#include <cmath>

namespace dwsafe {

// Planar vector used for positions (m), velocities (m/s), and unit directions.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }

    // Orthogonal complement (-y, x): rotation by +90 degrees.
    constexpr Vec2 perp() const { return {-y, x}; }

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double norm_2(const Vec2& v) { return std::hypot(v.x, v.y); }

inline double norm_inf(const Vec2& v) { return std::max(std::abs(v.x), std::abs(v.y)); }

inline Vec2 normalized(const Vec2& v) {
    const double n = norm_2(v);
    return n > 0.0 ? Vec2{v.x / n, v.y / n} : Vec2{0.0, 0.0};
}

inline Vec2 rotated(const Vec2& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace dwsafe
