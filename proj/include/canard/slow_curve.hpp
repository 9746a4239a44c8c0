#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "canard/angles.hpp"
#include "canard/errors.hpp"
#include "canard/system.hpp"

namespace canard {

/// Fold (jump) points of the slow curve. G_plus is the fold at the bottom of
/// the slow strip (smaller y); forward slow drift (y' > 0) carries the stable
/// branch into G_minus at the top.
struct FoldPair {
    TorusPoint G_plus;   // (sigma_plus, tau_plus)
    TorusPoint G_minus;  // (sigma_minus, tau_minus)

    double sigma_plus() const { return G_plus.x; }
    double tau_plus() const { return G_plus.y; }
    double sigma_minus() const { return G_minus.x; }
    double tau_minus() const { return G_minus.y; }
};

namespace detail {

/// Newton iteration for the interior extremum of f(., y, 0) in x, seeded at x0.
inline std::optional<double> newton_extremum_x(const SlowFastSystem& sys, double y, double x0,
                                               double tol, int max_iter = 60) {
    double x = x0;
    for (int i = 0; i < max_iter; ++i) {
        const double d = sys.f_x(x, y, 0.0);
        const double dd = sys.f_xx(x, y, 0.0);
        if (dd == 0.0 || !std::isfinite(d) || !std::isfinite(dd)) return std::nullopt;
        const double step = d / dd;
        x -= step;
        if (std::abs(step) < tol) return x;
    }
    return std::nullopt;
}

struct RootScan {
    bool has_roots = false;
    int sign_changes = 0;
    double x_lo = 0.0, x_hi = 0.0;  // a bracket around the two-root span
};

inline RootScan scan_roots_in_x(const SlowFastSystem& sys, double y, int nx) {
    RootScan out;
    double prev_x = -pi;
    double prev_f = sys.f(prev_x, y, 0.0);
    double first_change_x = 0.0;
    for (int j = 1; j <= nx; ++j) {
        const double x = -pi + two_pi * double(j) / double(nx);
        const double fv = sys.f(x, y, 0.0);
        if ((prev_f < 0.0 && fv >= 0.0) || (prev_f > 0.0 && fv <= 0.0)) {
            if (out.sign_changes == 0) first_change_x = prev_x;
            out.sign_changes += 1;
            out.x_hi = x;
        }
        prev_x = x;
        prev_f = fv;
    }
    out.has_roots = out.sign_changes >= 2;
    out.x_lo = first_change_x;
    return out;
}

}  // namespace detail

/// Locate the two fold points of the slow curve f(x, y, 0) = 0: the extremes
/// of the curve in y, where f = f_x = 0. Residuals are polished below
/// `tol_curve` by Newton on the x-extremum envelope, whose y-derivative is
/// f_y at the tracked extremum.
inline FoldPair find_folds(const SlowFastSystem& sys, double tol_curve = 1e-12, int grid = 1024) {
    // Coarse scan: which horizontal circles carry roots of f(., y, 0)?
    std::vector<char> has(grid, 0);
    std::vector<detail::RootScan> scans(grid);
    for (int i = 0; i < grid; ++i) {
        const double y = -pi + two_pi * (double(i) + 0.5) / double(grid);
        scans[i] = detail::scan_roots_in_x(sys, y, grid);
        has[i] = scans[i].has_roots ? 1 : 0;
        if (scans[i].sign_changes > 2)
            throw TooManyFolds("find_folds: more than two roots on a horizontal circle");
    }
    const int total = int(std::count(has.begin(), has.end(), char(1)));
    if (total == 0) throw NoFolds("find_folds: slow curve is empty");
    if (total == grid)
        throw NoFolds("find_folds: slow curve crosses every horizontal circle (no y-extremes)");

    // The occupied set must be one contiguous (cyclic) run of circles.
    int runs = 0;
    for (int i = 0; i < grid; ++i)
        if (has[i] && !has[(i + grid - 1) % grid]) ++runs;
    if (runs != 1) throw TooManyFolds("find_folds: slow curve splits into several components");

    int start = 0;
    while (!(has[start] && !has[(start + grid - 1) % grid])) ++start;
    const auto grid_y = [&](int i) {
        return -pi + two_pi * (double((i % grid + grid) % grid) + 0.5) / double(grid);
    };
    const int end = start + total - 1;  // cyclic indices [start, end] occupied

    // Track the interior extremum x*(y) of f between the two branches and
    // solve v(y) = f(x*(y), y, 0) = 0 by Newton with v'(y) = f_y(x*(y), y, 0).
    const auto polish_fold = [&](int inside_idx, double y_outside) -> TorusPoint {
        const double y_in = grid_y(inside_idx);
        const auto& sc = scans[((inside_idx % grid) + grid) % grid];
        double xs = detail::newton_extremum_x(sys, y_in, 0.5 * (sc.x_lo + sc.x_hi), 1e-14)
                        .value_or(0.5 * (sc.x_lo + sc.x_hi));
        double y = y_in;
        const double v_in = sys.f(xs, y_in, 0.0);
        // Walk toward the fold by bisection first (keeps the extremum tracked),
        // then polish with Newton.
        double ylo = y_in, yhi = y_outside;
        for (int i = 0; i < 40; ++i) {
            const double ym = 0.5 * (ylo + yhi);
            const auto xm = detail::newton_extremum_x(sys, ym, xs, 1e-14);
            if (!xm) {
                yhi = ym;
                continue;
            }
            const double vm = sys.f(*xm, ym, 0.0);
            if (std::signbit(vm) == std::signbit(v_in)) {
                ylo = ym;
                xs = *xm;
            } else {
                yhi = ym;
            }
        }
        y = ylo;
        for (int i = 0; i < 50; ++i) {
            const auto xm = detail::newton_extremum_x(sys, y, xs, 1e-15);
            if (xm) xs = *xm;
            const double v = sys.f(xs, y, 0.0);
            const double dv = sys.f_y(xs, y, 0.0);
            if (dv == 0.0) break;
            y -= v / dv;
            if (std::abs(v) < 0.5 * tol_curve && std::abs(sys.f_x(xs, y, 0.0)) < tol_curve) break;
        }
        if (const auto xm = detail::newton_extremum_x(sys, y, xs, 1e-15)) xs = *xm;
        if (std::abs(sys.f(xs, y, 0.0)) > 100 * tol_curve)
            throw NumericalError("find_folds: fold residual did not converge");
        return TorusPoint::reduced(xs, y);
    };

    const double dy = two_pi / double(grid);
    const TorusPoint bottom = polish_fold(start, grid_y(start) - dy);
    const TorusPoint top = polish_fold(end, grid_y(end) + dy);
    if (!(bottom.y < top.y)) throw NumericalError("find_folds: fold ordering violated");
    return FoldPair{bottom, top};
}

/// Graph model of the two branches of the slow curve over y in
/// (tau_plus, tau_minus): the stable branch s^-(y) has f_x < 0, the unstable
/// branch s^+(y) has f_x > 0. Dense samples plus per-query root polishing.
class SlowCurveModel {
public:
    SlowCurveModel(const SlowFastSystem& sys, FoldPair folds, int n_samples, double tol_curve)
        : sys_(&sys), folds_(folds), tol_(tol_curve) {
        if (n_samples < 8) throw ConfigError("compute_slow_curve: n_samples too small");
        const double span = folds_.tau_minus() - folds_.tau_plus();
        margin_ = 1e-7 * span;
        ys_.resize(n_samples);
        stable_.resize(n_samples);
        unstable_.resize(n_samples);
        mid_.resize(n_samples);
        for (int i = 0; i < n_samples; ++i) {
            const double t = (double(i) + 0.5) / double(n_samples);
            const double y = folds_.tau_plus() + margin_ + (span - 2.0 * margin_) * t;
            ys_[i] = y;
            solve_both(y, i);
        }
    }

    const FoldPair& folds() const { return folds_; }
    double tau_plus() const { return folds_.tau_plus(); }
    double tau_minus() const { return folds_.tau_minus(); }
    double tol_curve() const { return tol_; }
    const std::vector<double>& sample_ys() const { return ys_; }
    const std::vector<double>& sample_stable() const { return stable_; }
    const std::vector<double>& sample_unstable() const { return unstable_; }

    /// Branch with f_x < 0.
    double stable(double y) const { return eval(y, /*want_stable=*/true); }
    /// Branch with f_x > 0.
    double unstable(double y) const { return eval(y, /*want_stable=*/false); }

    /// dy-derivative of a branch from implicit differentiation, s' = -f_y / f_x.
    double stable_prime(double y) const {
        const double x = stable(y);
        return -sys_->f_y(x, y, 0.0) / sys_->f_x(x, y, 0.0);
    }
    double unstable_prime(double y) const {
        const double x = unstable(y);
        return -sys_->f_y(x, y, 0.0) / sys_->f_x(x, y, 0.0);
    }

    /// First-order representative of the invariant manifold near a branch,
    /// s(y, eps) = s0(y) + eps * g(s0, y, 0) * s0'(y) / f_x(s0, y, 0).
    double stable_first_order(double y, double eps) const {
        const double x = stable(y);
        const double fx = sys_->f_x(x, y, 0.0);
        return x + eps * sys_->g(x, y, 0.0) * (-sys_->f_y(x, y, 0.0) / fx) / fx;
    }
    double unstable_first_order(double y, double eps) const {
        const double x = unstable(y);
        const double fx = sys_->f_x(x, y, 0.0);
        return x + eps * sys_->g(x, y, 0.0) * (-sys_->f_y(x, y, 0.0) / fx) / fx;
    }

private:
    void solve_both(double y, int i) {
        // Interior extremum separates the branches.
        double seed = (i > 0) ? mid_[i - 1] : 0.5 * (folds_.sigma_plus() + folds_.sigma_minus());
        const auto xm = detail::newton_extremum_x(*sys_, y, seed, 1e-14);
        if (!xm) throw BranchLost("compute_slow_curve: lost interior extremum");
        mid_[i] = *xm;
        const double inner = sys_->f(*xm, y, 0.0);
        if (inner == 0.0) {
            stable_[i] = unstable_[i] = *xm;
            return;
        }
        const double a = solve_side(y, *xm, -1.0, inner);
        const double b = solve_side(y, *xm, +1.0, inner);
        if (sys_->f_x(a, y, 0.0) < 0.0) {
            stable_[i] = a;
            unstable_[i] = b;
        } else {
            stable_[i] = b;
            unstable_[i] = a;
        }
    }

    /// March outward from the interior extremum until f changes sign, then
    /// bisect and polish with Newton.
    double solve_side(double y, double x_mid, double dir, double inner) const {
        double step = 1e-3;
        double prev = x_mid;
        double cur = x_mid + dir * step;
        int guard = 0;
        while (std::signbit(sys_->f(cur, y, 0.0)) == std::signbit(inner)) {
            prev = cur;
            step *= 1.8;
            cur += dir * step;
            if (++guard > 64 || std::abs(cur - x_mid) > two_pi)
                throw BranchLost("compute_slow_curve: bracketing failed");
        }
        double lo = std::min(prev, cur), hi = std::max(prev, cur);
        double flo = sys_->f(lo, y, 0.0);
        for (int i = 0; i < 60 && (hi - lo) > 1e-10; ++i) {
            const double m = 0.5 * (lo + hi);
            const double fm = sys_->f(m, y, 0.0);
            if (std::signbit(fm) == std::signbit(flo)) {
                lo = m;
                flo = fm;
            } else {
                hi = m;
            }
        }
        double x = 0.5 * (lo + hi);
        for (int i = 0; i < 4; ++i) {
            const double fv = sys_->f(x, y, 0.0);
            const double dv = sys_->f_x(x, y, 0.0);
            if (dv == 0.0) break;
            x -= fv / dv;
            if (std::abs(fv) < 0.25 * tol_) break;
        }
        return x;
    }

    double eval(double y, bool want_stable) const {
        if (!(y > folds_.tau_plus() && y < folds_.tau_minus()))
            throw OutOfStrip("slow curve queried outside (tau_plus, tau_minus)");
        if (y - folds_.tau_plus() < margin_ || folds_.tau_minus() - y < margin_) {
            // Branches merge at the folds.
            return (y - folds_.tau_plus() < margin_) ? folds_.sigma_plus() : folds_.sigma_minus();
        }
        // Seed from the nearest samples, then polish at the query height.
        const auto it = std::lower_bound(ys_.begin(), ys_.end(), y);
        std::size_t i1 = std::min<std::size_t>(ys_.size() - 1, std::size_t(it - ys_.begin()));
        std::size_t i0 = (i1 == 0) ? 0 : i1 - 1;
        const auto& br = want_stable ? stable_ : unstable_;
        double x;
        if (i0 == i1) {
            x = br[i0];
        } else {
            const double t = (y - ys_[i0]) / (ys_[i1] - ys_[i0]);
            x = br[i0] + t * (br[i1] - br[i0]);
        }
        for (int i = 0; i < 30; ++i) {
            const double fv = sys_->f(x, y, 0.0);
            const double dv = sys_->f_x(x, y, 0.0);
            if (dv == 0.0) break;
            const double step = fv / dv;
            x -= step;
            if (std::abs(fv) < 0.25 * tol_ && std::abs(step) < 1e-12) break;
        }
        return x;
    }

    const SlowFastSystem* sys_;
    FoldPair folds_;
    double tol_;
    double margin_;
    std::vector<double> ys_, stable_, unstable_, mid_;
};

inline SlowCurveModel compute_slow_curve(const SlowFastSystem& sys, int n_samples = 2048,
                                         double tol_curve = 1e-12) {
    return SlowCurveModel(sys, find_folds(sys, tol_curve), n_samples, tol_curve);
}

}  // namespace canard
