#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "canard/fitting.hpp"
#include "canard/retmap.hpp"

namespace canard {

enum class Branch { Stable, Unstable };

/// First-order invariant-manifold representative of one branch, valid on a
/// strip that stays away from the folds (the correction g s0'/f_x blows up
/// there). Any representative exponentially close to the true manifold is
/// equally good for the asymptotics built on it.
struct SlowManifoldModel {
    const SlowCurveModel* curve = nullptr;
    Branch branch = Branch::Stable;
    double strip_lo = 0.0;
    double strip_hi = 0.0;

    SlowManifoldModel(const SlowCurveModel& c, Branch b, double margin)
        : curve(&c),
          branch(b),
          strip_lo(c.tau_plus() + margin),
          strip_hi(c.tau_minus() - margin) {}

    bool in_strip(double y) const { return y >= strip_lo && y <= strip_hi; }

    double order0(double y) const {
        return branch == Branch::Stable ? curve->stable(y) : curve->unstable(y);
    }
    double eval(double y, double eps) const {
        return branch == Branch::Stable ? curve->stable_first_order(y, eps)
                                        : curve->unstable_first_order(y, eps);
    }
};

/// Linear normal-form coefficient a(y, eps) = f_x at the first-order
/// invariant-manifold point. Positive on the unstable branch, negative on
/// the stable one.
inline double a_coefficient(const ReturnMap& map, double eps, double y, Branch branch) {
    const auto& geom = map.geometry();
    const double margin = 0.25 * std::min(geom.delta_plus, geom.delta_minus);
    if (!(y > geom.tau_plus() + margin && y < geom.tau_minus() - margin))
        throw OutOfStrip("a_coefficient: y outside the validity strip");
    const double s = branch == Branch::Stable ? map.curve().stable_first_order(y, eps)
                                              : map.curve().unstable_first_order(y, eps);
    return map.system().f_x(s, y, eps);
}

/// Accumulated expansion along the unstable branch from alpha^+ up to y,
/// at eps = 0. Positive and increasing for y > alpha^+.
inline double phi_plus(const ReturnMap& map, double y) {
    const auto& geom = map.geometry();
    const auto integrand = [&](double v) {
        return map.system().f_x(map.curve().unstable(v), v, 0.0);
    };
    return adaptive_simpson(integrand, geom.alpha_plus, y, map.tolerances().quadrature);
}

/// Accumulated contraction along the stable branch from alpha^- down to y,
/// at eps = 0. Positive and decreasing for y < alpha^-.
inline double phi_minus(const ReturnMap& map, double y) {
    const auto& geom = map.geometry();
    const auto integrand = [&](double v) {
        return map.system().f_x(map.curve().stable(v), v, 0.0);
    };
    return adaptive_simpson(integrand, geom.alpha_minus, y, map.tolerances().quadrature);
}

struct BalanceData {
    double y_balance = 0.0;  // root of phi_plus = phi_minus
    double I = 0.0;          // 2 * phi_plus at the balance point
};

/// Solve the entry-exit balance phi_plus(y) = phi_minus(y) on
/// (alpha^+, alpha^-).
inline BalanceData balance_point(const ReturnMap& map) {
    const auto& geom = map.geometry();
    const auto diff = [&](double y) { return phi_plus(map, y) - phi_minus(map, y); };
    const double span = geom.alpha_minus - geom.alpha_plus;
    const double lo = geom.alpha_plus + 1e-9 * span;
    const double hi = geom.alpha_minus - 1e-9 * span;
    if (std::signbit(diff(lo)) == std::signbit(diff(hi)))
        throw NoRoot("balance_point: phi_plus - phi_minus has no sign change");
    BalanceData out;
    out.y_balance = bisect(diff, lo, hi, 1e-13, 0.0);
    out.I = 2.0 * phi_plus(map, out.y_balance);
    return out;
}

enum class JumpDirection { Up, Down };

struct JumpResult {
    double y_plus = 0.0;
    JumpDirection direction = JumpDirection::Down;
    bool entered_tube = false;  // false: the orbit was outside from alpha^+ on
    double window_top = 0.0;    // top of the instrumented tube window
};

/// Top of the y-window on which the tube around the first-order unstable
/// manifold is meaningful: the branches must stay 4b apart (so the tube
/// cannot brush the stable branch) and the first-order correction must stay
/// below 2b (near the upper fold it diverges).
inline double tube_window_top(const ReturnMap& map, double eps, double b) {
    const auto& geom = map.geometry();
    const double span = geom.tau_minus() - geom.tau_plus();
    const double hi = geom.tau_minus() - 1e-4 * span;
    // Both cuts bite near the upper fold only; scan upward from mid-strip.
    const double y0 = 0.5 * (geom.alpha_plus + geom.tau_minus());
    double cap = y0;
    const int n = 400;
    for (int i = 1; i <= n; ++i) {
        const double y = y0 + (hi - y0) * double(i) / double(n);
        const double sep = map.curve().unstable(y) - map.curve().stable(y);
        const double corr =
            std::abs(map.curve().unstable_first_order(y, eps) - map.curve().unstable(y));
        if (sep < 4.0 * b || corr > 2.0 * b) break;
        cap = y;
    }
    if (!(cap > geom.alpha_plus))
        throw ConfigError("jump_height: tube half-width leaves no valid window");
    return cap;
}

/// Height at which a canard trajectory leaves the tube |x - s^+(y, eps)| < b
/// around the unstable branch, measured on the window where the tube is
/// meaningful. The exit is the first departure after the trajectory has
/// entered the tube; a trajectory that never enters reports y_plus = alpha^+
/// (it barely brushes the branch). A trajectory still inside at the window
/// top has no observable jump.
inline JumpResult jump_height(const ReturnMap& map, double eps, double x0, double b = 0.1) {
    const auto& geom = map.geometry();
    if (!map.is_canard(eps, x0)) throw std::invalid_argument("jump_height: x0 is not a canard");

    const double y_top = tube_window_top(map, eps, b);
    const double x_at_alpha =
        transit(map.system(), eps, -pi, geom.alpha_plus, wrap_angle(x0), map.integrator())
            .x_lifted;

    const auto deviation = [&](double x_lifted, double y) {
        return reduce_near(x_lifted - map.curve().unstable_first_order(y, eps), 0.0);
    };

    const int n = 2400;
    const auto path =
        trajectory(map.system(), eps, geom.alpha_plus, y_top, x_at_alpha, n, map.integrator());

    JumpResult out;
    out.window_top = y_top;
    const double dev0 = deviation(path.front().x_lifted, path.front().y);
    bool ever_inside = std::abs(dev0) <= b;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double dev = deviation(path[i].x_lifted, path[i].y);
        const bool now_inside = std::abs(dev) <= b;
        if (ever_inside && !now_inside) {
            // Refine the crossing within the bracketing interval.
            double ylo = path[i - 1].y, yhi = path[i].y;
            double xlo = path[i - 1].x_lifted;
            double dev_hi = dev;
            for (int it = 0; it < 30 && (yhi - ylo) > 1e-10; ++it) {
                const double ym = 0.5 * (ylo + yhi);
                const double xm =
                    transit(map.system(), eps, ylo, ym, xlo, map.integrator()).x_lifted;
                if (std::abs(deviation(xm, ym)) <= b) {
                    ylo = ym;
                    xlo = xm;
                } else {
                    yhi = ym;
                    dev_hi = deviation(xm, ym);
                }
            }
            out.y_plus = yhi;
            out.direction = dev_hi < 0.0 ? JumpDirection::Down : JumpDirection::Up;
            out.entered_tube = true;
            return out;
        }
        ever_inside = ever_inside || now_inside;
    }
    if (ever_inside)
        throw NeverExits("jump_height: trajectory stays in the tube through the window");
    out.y_plus = geom.alpha_plus;
    out.direction = dev0 < 0.0 ? JumpDirection::Down : JumpDirection::Up;
    out.entered_tube = false;
    return out;
}

struct DerivativeAsymptotics {
    struct Sample {
        double eps;
        std::vector<double> products;  // eps * logJ(base -> Gamma+) per x-fraction
        double mid_product;
        double x_spread;  // max - min over the fractions
    };
    std::vector<Sample> samples;
    double fitted_constant = 0.0;  // intercept of mid_product vs eps
    std::vector<double> cauchy_gaps;  // |successive mid_product differences|
};

/// Scaled log-derivative of the entry map (base section to Gamma^+) sampled
/// inside D+. The product eps * logJ converges to a delta-dependent constant.
inline DerivativeAsymptotics derivative_asymptotics(
    const ReturnMap& map, const std::vector<double>& eps_list,
    const std::vector<double>& fractions = {0.25, 0.5, 0.75}) {
    DerivativeAsymptotics out;
    for (const double eps : eps_list) {
        const CanardSegments segs = map.canard_segments(eps);
        DerivativeAsymptotics::Sample s;
        s.eps = eps;
        for (const double t : fractions) {
            const double x0 = segs.p_plus + t * segs.width_plus();
            const TransitResult tr = transit(map.system(), eps, -pi, map.geometry().alpha_plus,
                                             wrap_angle(x0), map.integrator());
            s.products.push_back(eps * tr.log_jacobian);
        }
        const auto [mn, mx] = std::minmax_element(s.products.begin(), s.products.end());
        s.x_spread = *mx - *mn;
        s.mid_product = s.products[s.products.size() / 2];
        out.samples.push_back(std::move(s));
    }
    if (out.samples.size() >= 2) {
        std::vector<double> es, mids;
        for (const auto& s : out.samples) {
            es.push_back(s.eps);
            mids.push_back(s.mid_product);
        }
        out.fitted_constant = fit_linear(es, mids).intercept;
        for (std::size_t i = 0; i + 1 < out.samples.size(); ++i)
            out.cauchy_gaps.push_back(
                std::abs(out.samples[i + 1].mid_product - out.samples[i].mid_product));
    }
    return out;
}

struct SlowManifoldErrorFit {
    struct Sample {
        double eps;
        double max_error;  // max |x_traj(y) - s0(y)| over the fold window
    };
    std::vector<Sample> samples;
    double exponent = 0.0;  // q in error ~ eps^q
};

/// Distance between the attracting trajectory and the order-0 slow curve over
/// the fold window y in [tau^+ + eps^(1/3), tau^+ + delta_+], fitted as a
/// power law in eps. Requires eps^(1/3) < delta_+ so the window is nonempty.
inline SlowManifoldErrorFit slow_manifold_error(const ReturnMap& map,
                                                const std::vector<double>& eps_list) {
    SlowManifoldErrorFit out;
    const auto& geom = map.geometry();
    for (const double eps : eps_list) {
        const double win_lo = geom.tau_plus() + std::cbrt(eps);
        const double win_hi = geom.tau_plus() + geom.delta_plus;
        if (!(win_lo < win_hi))
            throw ConfigError("slow_manifold_error: eps^(1/3) >= delta_+, empty fold window");
        const double y_start = geom.tau_plus() + 0.8 * std::cbrt(eps);
        const double x0 = map.curve().stable_first_order(y_start, eps);
        const auto path = trajectory(map.system(), eps, y_start, win_hi, x0, 400, map.integrator());
        double err = 0.0;
        for (const auto& p : path) {
            if (p.y < win_lo) continue;
            err = std::max(err, std::abs(p.x_lifted - map.curve().stable(p.y)));
        }
        out.samples.push_back({eps, err});
    }
    if (out.samples.size() >= 2) {
        std::vector<double> le, lerr;
        for (const auto& s : out.samples) {
            le.push_back(std::log(s.eps));
            lerr.push_back(std::log(s.max_error));
        }
        out.exponent = fit_linear(le, lerr).slope;
    }
    return out;
}

}  // namespace canard
