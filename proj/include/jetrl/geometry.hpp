#pragma once

#include <cmath>
#include <numbers>

#include "jetrl/errors.hpp"

namespace jetrl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Unit vector pointing along `heading`.
inline Vec2 direction(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Reduces an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw DomainError("wrap_angle: non-finite angle");
    }
    constexpr double pi = std::numbers::pi;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (theta > -pi && theta <= pi) {
        return theta;
    }
    double r = std::remainder(theta, two_pi); // in [-pi, pi]
    if (r <= -pi) {
        r += two_pi;
    }
    return r;
}

inline double distance(Vec2 a, Vec2 b) {
    if (!is_finite(a) || !is_finite(b)) {
        throw DomainError("distance: non-finite point");
    }
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Angle of the vector from `from` to `to`, in (-pi, pi]. Coincident points give 0.
inline double bearing(Vec2 from, Vec2 to) {
    if (from == to) {
        return 0.0;
    }
    double a = std::atan2(to.y - from.y, to.x - from.x);
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

/// How far `heading` must rotate (counterclockwise positive) to face `bearing`.
inline double relative_angle(double heading, double bearing_rad) { return wrap_angle(bearing_rad - heading); }

} // namespace jetrl
