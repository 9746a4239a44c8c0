#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "canard/angles.hpp"
#include "canard/errors.hpp"
#include "canard/system.hpp"

namespace canard {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 10'000'000;
    double initial_step = 0.0;  // <= 0: choose automatically
};

/// Endpoint of a y-parametrized transit on the universal cover.
struct TransitResult {
    double x_lifted = 0.0;    // x at y_to, lifted continuously from x0
    double winding = 0.0;     // x_lifted - x0 (may span many turns)
    double log_jacobian = 0.0;  // ln d(x at y_to)/d(x at y_from)
    long steps = 0;
    double est_error = 0.0;
};

struct TrajectorySample {
    double y = 0.0;
    double x_lifted = 0.0;
    double log_jacobian = 0.0;
};

namespace detail {

/// Right-hand side of the y-parametrized fast equation and its variational
/// companion:
///   dx/dy = f / (eps g),         dL/dy = d/dx [f / (eps g)].
struct FastEquation {
    const SlowFastSystem* sys;
    double eps;

    void operator()(double y, double x_lifted, double& dx, double& dL) const {
        const double x = wrap_angle(x_lifted);
        const double f = sys->f(x, y, eps);
        const double g = sys->g(x, y, eps);
        dx = f / (eps * g);
        dL = (sys->f_x(x, y, eps) * g - f * sys->g_x(x, y, eps)) / (eps * g * g);
    }
};

// Dormand-Prince 5(4) coefficients.
inline constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr std::array<std::array<double, 6>, 7> kA = {{
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
}};
// Difference between the 5th- and 4th-order weights.
inline constexpr std::array<double, 7> kE = {71.0 / 57600,      0.0,         -71.0 / 16695,
                                             71.0 / 1920,       -17253.0 / 339200,
                                             22.0 / 525,        -1.0 / 40};

}  // namespace detail

/// Integrate dx/dy = f/(eps g) together with the log of its variational
/// multiplier from y_from to y_to (either order) by an adaptive embedded
/// 5(4) pair with error control on both components. Every section {y = const}
/// is an exact integration endpoint.
inline TransitResult transit(const SlowFastSystem& sys, double eps, double y_from, double y_to,
                             double x0, const IntegratorConfig& cfg = {}) {
    if (!(eps > 0.0)) throw ConfigError("transit: eps must be positive");
    TransitResult out;
    out.x_lifted = x0;
    if (y_from == y_to) return out;

    const detail::FastEquation rhs{&sys, eps};
    const double dir = (y_to > y_from) ? 1.0 : -1.0;
    double y = y_from;
    double x = x0, L = 0.0;
    double h = cfg.initial_step > 0.0 ? cfg.initial_step : std::min(0.05 * eps, 1e-3);
    h = dir * std::min(h, std::abs(y_to - y_from));

    double k1x, k1L;
    rhs(y, x, k1x, k1L);
    long accepted = 0, attempts = 0;

    std::array<double, 7> kx{}, kL{};
    while (dir * (y_to - y) > 0.0) {
        if (++attempts > cfg.max_steps)
            throw StepLimitExceeded("transit: step budget exhausted");
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(y)))
            throw StepLimitExceeded("transit: step size underflow");
        if (dir * (y + h - y_to) > 0.0) h = y_to - y;  // land exactly on the section

        kx[0] = k1x;
        kL[0] = k1L;
        for (int s = 1; s < 7; ++s) {
            double ax = 0.0, aL = 0.0;
            for (int j = 0; j < s; ++j) {
                ax += detail::kA[s][j] * kx[j];
                aL += detail::kA[s][j] * kL[j];
            }
            rhs(y + detail::kC[s] * h, x + h * ax, kx[s], kL[s]);
        }
        // Stage 7 is the 5th-order solution (FSAL).
        double x5 = x, L5 = L;
        for (int j = 0; j < 6; ++j) {
            x5 += h * detail::kA[6][j] * kx[j];
            L5 += h * detail::kA[6][j] * kL[j];
        }
        double ex = 0.0, eL = 0.0;
        for (int j = 0; j < 7; ++j) {
            ex += detail::kE[j] * kx[j];
            eL += detail::kE[j] * kL[j];
        }
        ex *= h;
        eL *= h;
        if (!std::isfinite(x5) || !std::isfinite(L5))
            throw NonFiniteState("transit: state became non-finite");

        const double scale_x = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x), std::abs(x5));
        const double scale_L = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(L), std::abs(L5));
        const double err = std::max(std::abs(ex) / scale_x, std::abs(eL) / scale_L);

        if (err <= 1.0) {
            y += h;
            x = x5;
            L = L5;
            k1x = kx[6];
            k1L = kL[6];
            ++accepted;
            out.est_error = std::max(out.est_error, std::abs(ex));
            const double grow = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
        }
    }

    out.x_lifted = x;
    out.winding = x - x0;
    out.log_jacobian = L;
    out.steps = accepted;
    return out;
}

/// Dense output at n_samples uniformly spaced y values, produced by chaining
/// exact sub-transits; the final sample coincides with transit().
inline std::vector<TrajectorySample> trajectory(const SlowFastSystem& sys, double eps,
                                                double y_from, double y_to, double x0,
                                                int n_samples, const IntegratorConfig& cfg = {}) {
    if (n_samples < 2) throw ConfigError("trajectory: need at least 2 samples");
    std::vector<TrajectorySample> out;
    out.reserve(std::size_t(n_samples));
    out.push_back({y_from, x0, 0.0});
    double x = x0, L = 0.0;
    for (int i = 1; i < n_samples; ++i) {
        const double yi = y_from + (y_to - y_from) * double(i) / double(n_samples - 1);
        const TransitResult leg = transit(sys, eps, out.back().y, yi, x, cfg);
        x = leg.x_lifted;
        L += leg.log_jacobian;
        out.push_back({yi, x, L});
    }
    return out;
}

}  // namespace canard
