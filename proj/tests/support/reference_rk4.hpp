#pragma once

// Fixed-step classical 4th-order reference for the y-parametrized fast
// equation and its log-variational companion. Test-only oracle, independent
// of the adaptive integration path it cross-checks.

#include <cmath>

#include "canard/angles.hpp"
#include "canard/system.hpp"

namespace canard::testsupport {

struct Rk4Result {
    double x_lifted;
    double log_jacobian;
};

inline Rk4Result rk4_reference(const SlowFastSystem& sys, double eps, double y_from, double y_to,
                               double x0, long n_steps) {
    const auto rhs = [&](double y, double x, double& dx, double& dL) {
        const double xw = wrap_angle(x);
        const double f = sys.f(xw, y, eps);
        const double g = sys.g(xw, y, eps);
        dx = f / (eps * g);
        dL = (sys.f_x(xw, y, eps) * g - f * sys.g_x(xw, y, eps)) / (eps * g * g);
    };
    const double h = (y_to - y_from) / double(n_steps);
    double x = x0, L = 0.0, y = y_from;
    double k1x, k1L, k2x, k2L, k3x, k3L, k4x, k4L;
    for (long i = 0; i < n_steps; ++i) {
        rhs(y, x, k1x, k1L);
        rhs(y + 0.5 * h, x + 0.5 * h * k1x, k2x, k2L);
        rhs(y + 0.5 * h, x + 0.5 * h * k2x, k3x, k3L);
        rhs(y + h, x + h * k3x, k4x, k4L);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        L += h / 6.0 * (k1L + 2.0 * k2L + 2.0 * k3L + k4L);
        y = y_from + h * double(i + 1);
    }
    return {x, L};
}

}  // namespace canard::testsupport
