#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "canard/angles.hpp"
#include "canard/errors.hpp"
#include "canard/geometry.hpp"
#include "canard/integrate.hpp"
#include "canard/slow_curve.hpp"
#include "canard/system.hpp"

namespace canard {

struct Tolerances {
    double curve = 1e-12;     // slow-curve residuals
    double fix = 1e-9;        // fixed-point bisection, in x
    double hyp = 1e-3;        // hyperbolicity margin, in log-multiplier
    double slope = 1e-6;      // slope-one landmark, in log-slope
    double tangent = 1e-6;    // tangency band, in corner-gap units
    double quadrature = 1e-10;
};

struct ScanConfig {
    int n_scan = 256;    // base grid on the full circle
    int n_refine = 256;  // extra uniform grid inside D+
};

struct MapPoint {
    double x_out = 0.0;         // lifted image
    double log_jacobian = 0.0;
};

/// Canard segments at the base section: D+ = [p_plus, q_plus] carries the
/// reverse-time image of J+, D- = [p_minus, q_minus] the forward image of J-.
/// All four endpoints are lifted reals transported with their winding.
struct CanardSegments {
    double p_plus = 0.0, q_plus = 0.0;    // at y = -pi
    double p_minus = 0.0, q_minus = 0.0;  // at y = +pi

    double width_plus() const { return q_plus - p_plus; }
    double width_minus() const { return q_minus - p_minus; }
    double mid_plus() const { return 0.5 * (p_plus + q_plus); }
    double mid_minus() const { return 0.5 * (p_minus + q_minus); }
};

/// Landmarks of the lifted graph: A-+ above the ends of D+, slope-one points
/// B-+ (absent when the map has no unit slope), corners E-+ of the rectangle
/// K = D+ x D-, and the base point u0 of the trajectory that continues the
/// unstable invariant manifold backward to the base section.
struct GraphLandmarks {
    LiftedPoint A_minus, A_plus;
    std::optional<LiftedPoint> B_minus, B_plus;
    LiftedPoint E_minus, E_plus;
    double u0 = 0.0;
};

struct CycleRecord {
    double x_fixed = 0.0;       // lifted representative at y = -pi
    int winding_n = 0;          // branch: P(x) - x = 2 pi n
    double log_multiplier = 0.0;
    bool stable = false;
    bool hyperbolic = false;
    bool canard = false;
};

struct GraphSample {
    double x = 0.0;       // lifted input
    double Px = 0.0;      // lifted image
    double log_jacobian = 0.0;
};

/// Global Poincare map of the section {y = -pi} and everything built on it.
/// The system must be orientation-normalized. Stateless over immutable data;
/// all methods are const and safe to run concurrently.
class ReturnMap {
public:
    ReturnMap(const SlowFastSystem& sys, SectionGeometry geom, IntegratorConfig icfg = {},
              Tolerances tol = {}, ScanConfig scan = {})
        : sys_(&sys),
          geom_(geom),
          curve_(sys, geom.folds, 2048, tol.curve),
          icfg_(icfg),
          tol_(tol),
          scan_(scan) {}

    const SlowFastSystem& system() const { return *sys_; }
    const SectionGeometry& geometry() const { return geom_; }
    const SlowCurveModel& curve() const { return curve_; }
    const IntegratorConfig& integrator() const { return icfg_; }
    const Tolerances& tolerances() const { return tol_; }

    /// One full transit y: -pi -> +pi. The lift is continuous in x0 and eps.
    MapPoint poincare_map(double eps, double x0_lifted) const {
        const double xw = wrap_angle(x0_lifted);
        const TransitResult t = transit(*sys_, eps, -pi, pi, xw, icfg_);
        return {x0_lifted + t.winding, t.log_jacobian};
    }

    CanardSegments canard_segments(double eps) const {
        CanardSegments s;
        s.p_plus = transit(*sys_, eps, geom_.alpha_plus, -pi, geom_.j_plus_lo(), icfg_).x_lifted;
        s.q_plus = transit(*sys_, eps, geom_.alpha_plus, -pi, geom_.j_plus_hi(), icfg_).x_lifted;
        s.p_minus = transit(*sys_, eps, geom_.alpha_minus, pi, geom_.j_minus_lo(), icfg_).x_lifted;
        s.q_minus = transit(*sys_, eps, geom_.alpha_minus, pi, geom_.j_minus_hi(), icfg_).x_lifted;
        if (!(s.p_plus < s.q_plus && s.p_minus < s.q_minus))
            throw NumericalError("canard_segments: endpoint order violated");
        return s;
    }

    /// Base point of the backward continuation of the unstable invariant
    /// manifold; the graph's expansion peak sits here, exponentially closer
    /// to u0 than the width of D+.
    double maximal_canard(double eps, const CanardSegments& segs) const {
        const double yc = 0.5 * (geom_.alpha_plus + geom_.alpha_minus);
        const double x_on = curve_.unstable_first_order(yc, eps);
        const double u0 = transit(*sys_, eps, yc, -pi, x_on, icfg_).x_lifted;
        if (!(u0 > segs.p_plus && u0 < segs.q_plus))
            throw NumericalError("maximal_canard: continuation left D+");
        return u0;
    }

    GraphLandmarks landmarks(double eps) const { return landmarks(eps, canard_segments(eps)); }

    GraphLandmarks landmarks(double eps, const CanardSegments& segs) const {
        GraphLandmarks lm;
        lm.u0 = maximal_canard(eps, segs);
        const double anchor = segs.mid_minus();
        const auto graph_point = [&](double x) {
            const MapPoint mp = poincare_map(eps, x);
            return LiftedPoint{x, reduce_near(mp.x_out, anchor)};
        };
        lm.A_minus = graph_point(segs.p_plus);
        lm.A_plus = graph_point(segs.q_plus);
        lm.E_minus = {segs.p_plus, segs.q_minus};
        lm.E_plus = {segs.q_plus, segs.p_minus};

        const double peak = poincare_map(eps, lm.u0).log_jacobian;
        if (peak <= tol_.slope) return lm;  // no unit slope: flagged by absent B's
        lm.B_minus = graph_point(slope_one_point(eps, segs, lm.u0, /*rising_flank=*/true));
        lm.B_plus = graph_point(slope_one_point(eps, segs, lm.u0, /*rising_flank=*/false));
        return lm;
    }

    /// Location of the slope-one point on one flank of the expansion peak.
    /// The log-slope is deeply negative at the ends of D+ and positive at u0,
    /// so each flank carries exactly one crossing.
    double slope_one_point(double eps, const CanardSegments& segs, double u0,
                           bool rising_flank) const {
        const double w = segs.width_plus();
        if (poincare_map(eps, u0).log_jacobian <= tol_.slope)
            throw SlopeOneNotFound("slope_one_point: no expansion peak at this eps");
        if (rising_flank) return bisect_logj(eps, segs.p_plus + 1e-12 * w, u0, 0.0);
        return bisect_logj(eps, u0, segs.q_plus - 1e-12 * w, 0.0);
    }

    /// Fixed points of the lifted map on every integer branch within reach of
    /// the scanned displacement. Records come sorted by x.
    std::vector<CycleRecord> fixed_points(double eps) const {
        const CanardSegments segs = canard_segments(eps);
        const double u0 = maximal_canard(eps, segs);
        const auto scan = scan_displacement(eps, segs, u0);

        double dmin = scan.front().Px - scan.front().x;
        double dmax = dmin;
        for (const auto& s : scan) {
            dmin = std::min(dmin, s.Px - s.x);
            dmax = std::max(dmax, s.Px - s.x);
        }
        std::vector<CycleRecord> out;
        const int n_lo = int(std::ceil(dmin / two_pi));
        const int n_hi = int(std::floor(dmax / two_pi));
        for (int n = n_lo; n <= n_hi; ++n) {
            const double target = two_pi * double(n);
            for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
                const double a = scan[i].Px - scan[i].x - target;
                const double b = scan[i + 1].Px - scan[i + 1].x - target;
                if (a == 0.0 || std::signbit(a) == std::signbit(b)) continue;
                const double root = bisect_displacement(eps, scan[i].x, scan[i + 1].x, target);
                CycleRecord rec;
                rec.x_fixed = root;
                rec.winding_n = n;
                rec.log_multiplier = poincare_map(eps, root).log_jacobian;
                // Stability from the crossing direction of the displacement:
                // topologically robust even when the multiplier of a steep
                // root is beyond the floating-point resolution of its cliff.
                rec.stable = a > 0.0;
                rec.hyperbolic = std::abs(rec.log_multiplier) > tol_.hyp &&
                                 (rec.log_multiplier < 0.0) == rec.stable;
                rec.canard = is_canard(eps, root, segs);
                out.push_back(rec);
            }
        }
        std::sort(out.begin(), out.end(),
                  [](const CycleRecord& a, const CycleRecord& b) { return a.x_fixed < b.x_fixed; });
        return out;
    }

    /// A trajectory is a canard when it crosses J+; equivalently its base
    /// point lies in D+. Both tests run and must agree away from the segment
    /// endpoints.
    bool is_canard(double eps, double x_fixed) const {
        return is_canard(eps, x_fixed, canard_segments(eps));
    }

    bool is_canard(double eps, double x_fixed, const CanardSegments& segs) const {
        const double xr = reduce_near(x_fixed, segs.mid_plus());
        const bool member = xr >= segs.p_plus && xr <= segs.q_plus;
        const double at_plus =
            wrap_angle(transit(*sys_, eps, -pi, geom_.alpha_plus, wrap_angle(x_fixed), icfg_).x_lifted);
        const bool crosses = at_plus >= geom_.j_plus_lo() && at_plus <= geom_.j_plus_hi();
        if (member != crosses) {
            const double d_edge = std::min(std::abs(xr - segs.p_plus), std::abs(xr - segs.q_plus));
            if (d_edge > 1e-6)
                throw NumericalError("is_canard: membership and crossing tests disagree");
        }
        return crosses;
    }

    /// Average lifted displacement per return over n_iter iterations, in units
    /// of full turns. Reports the exact integer when the orbit has converged
    /// to a hyperbolic fixed point: two consecutive displacements equal to the
    /// same full-turn count within the integration noise floor.
    double rotation_number(double eps, int n_iter, double x0 = 0.0) const {
        if (n_iter < 1) throw ConfigError("rotation_number: n_iter must be >= 1");
        constexpr double snap = 1e-6;  // rad; generous vs 1e-9-level map noise
        double x = x0;
        double prev_disp = std::numeric_limits<double>::quiet_NaN();
        double last_disp = 0.0;
        for (int i = 0; i < n_iter; ++i) {
            const double nx = poincare_map(eps, x).x_out;
            prev_disp = (i == 0) ? std::numeric_limits<double>::quiet_NaN() : last_disp;
            last_disp = nx - x;
            x = nx;
        }
        const double nearest = std::round(last_disp / two_pi);
        if (std::abs(last_disp - two_pi * nearest) < snap &&
            (std::isnan(prev_disp) ? n_iter == 1
                                   : std::abs(prev_disp - two_pi * nearest) < snap))
            return nearest;
        return (x - x0) / (two_pi * double(n_iter));
    }

    /// Connected arcs of U = { x : log-slope in [-ln 2, ln 2] }.
    std::vector<std::pair<double, double>> unit_slope_set(double eps) const {
        const CanardSegments segs = canard_segments(eps);
        const double u0 = maximal_canard(eps, segs);
        const auto scan = scan_displacement(eps, segs, u0);
        const double lo = -std::log(2.0), hi = std::log(2.0);
        const auto band = [&](double v) { return v < lo ? -1 : (v > hi ? +1 : 0); };

        std::vector<std::pair<double, double>> arcs;
        bool open = false;
        double arc_start = 0.0;
        int prev = band(scan.front().log_jacobian);
        if (prev == 0) {
            open = true;
            arc_start = scan.front().x;
        }
        for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
            int cur = band(scan[i + 1].log_jacobian);
            if (cur == prev) continue;
            // Bisect the threshold that was crossed between the two samples.
            const double level = (prev == -1 || cur == -1) ? lo : hi;
            const double xc = bisect_logj(eps, scan[i].x, scan[i + 1].x, level);
            if (cur == 0) {
                open = true;
                arc_start = xc;
            } else if (prev == 0 && open) {
                arcs.emplace_back(arc_start, xc);
                open = false;
            }
            // Direct -1 <-> +1 jumps across one sample: resolve the second
            // threshold inside the same interval.
            if (prev != 0 && cur != 0) {
                const double level2 = (cur == -1) ? lo : hi;
                const double xc2 = bisect_logj(eps, xc, scan[i + 1].x, level2);
                arcs.emplace_back(std::min(xc, xc2), std::max(xc, xc2));
                open = false;
            }
            prev = cur;
        }
        if (open) arcs.emplace_back(arc_start, scan.back().x);
        return arcs;
    }

    /// Sorted graph samples over one full period, refined inside D+.
    std::vector<GraphSample> graph_sample(double eps) const {
        const CanardSegments segs = canard_segments(eps);
        const double u0 = maximal_canard(eps, segs);
        return scan_displacement(eps, segs, u0);
    }

private:
    /// Sample the lifted graph over [p_plus, p_plus + 2 pi): a uniform grid on
    /// the whole circle, a uniform refinement inside D+, and a geometric
    /// ladder around u0 where the expansion peak hides at depth e^{-c/eps}.
    std::vector<GraphSample> scan_displacement(double eps, const CanardSegments& segs,
                                               double u0) const {
        std::vector<double> xs;
        xs.reserve(std::size_t(scan_.n_scan + scan_.n_refine) + 120);
        for (int i = 0; i < scan_.n_scan; ++i)
            xs.push_back(segs.p_plus + two_pi * double(i) / double(scan_.n_scan));
        const double w = segs.width_plus();
        for (int i = 0; i <= scan_.n_refine; ++i)
            xs.push_back(segs.p_plus + w * double(i) / double(scan_.n_refine));
        for (int j = 2; j <= 52; ++j) {
            const double off = w * std::pow(2.0, -double(j));
            xs.push_back(u0 - off);
            xs.push_back(u0 + off);
        }
        xs.push_back(u0);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

        std::vector<GraphSample> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const MapPoint mp = poincare_map(eps, xs[i]);
            out[i] = {xs[i], mp.x_out, mp.log_jacobian};
        }
        return out;
    }

    /// Bisect log-slope(x) = level between xa and xb (values must straddle).
    double bisect_logj(double eps, double xa, double xb, double level) const {
        double fa = poincare_map(eps, xa).log_jacobian - level;
        double fb = poincare_map(eps, xb).log_jacobian - level;
        if (std::signbit(fa) == std::signbit(fb))
            throw SlopeOneNotFound("log-slope level not bracketed");
        for (int i = 0; i < 200 && (xb - xa) > 1e-15 * std::max(1.0, std::abs(xa)); ++i) {
            const double m = 0.5 * (xa + xb);
            const double fm = poincare_map(eps, m).log_jacobian - level;
            if (fm == 0.0) return m;
            if (std::abs(fm) < tol_.slope) return m;
            if (std::signbit(fm) == std::signbit(fa)) {
                xa = m;
                fa = fm;
            } else {
                xb = m;
                fb = fm;
            }
        }
        return 0.5 * (xa + xb);
    }

    /// Bisect P(x) - x = target to tol_.fix in x.
    double bisect_displacement(double eps, double xa, double xb, double target) const {
        double fa = poincare_map(eps, xa).x_out - xa - target;
        for (int i = 0; i < 200 && (xb - xa) > tol_.fix; ++i) {
            const double m = 0.5 * (xa + xb);
            const double fm = poincare_map(eps, m).x_out - m - target;
            if (fm == 0.0) return m;
            if (std::signbit(fm) == std::signbit(fa)) {
                xa = m;
                fa = fm;
            } else {
                xb = m;
            }
        }
        return 0.5 * (xa + xb);
    }

    const SlowFastSystem* sys_;
    SectionGeometry geom_;
    SlowCurveModel curve_;
    IntegratorConfig icfg_;
    Tolerances tol_;
    ScanConfig scan_;
};

}  // namespace canard
