#pragma once

#include <cmath>
#include <numbers>

namespace canard {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to the fundamental interval [-pi, pi).
inline double wrap_angle(double a) {
    double r = std::remainder(a, two_pi);
    if (r >= pi) r -= two_pi;   // remainder returns (-pi, pi]; we want [-pi, pi)
    return r;
}

/// Shift `x` by the multiple of 2*pi that brings it closest to `anchor`.
inline double reduce_near(double x, double anchor) {
    return x - two_pi * std::round((x - anchor) / two_pi);
}

/// Point on the torus, both coordinates reduced to [-pi, pi).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    static TorusPoint reduced(double x, double y) { return {wrap_angle(x), wrap_angle(y)}; }
};

/// Point on the universal cover (unreduced coordinates).
struct LiftedPoint {
    double x = 0.0;
    double y = 0.0;

    TorusPoint project() const { return TorusPoint::reduced(x, y); }
};

}  // namespace canard
