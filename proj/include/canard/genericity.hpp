#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "canard/slow_curve.hpp"
#include "canard/system.hpp"

namespace canard {

struct ConditionResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;
};

/// Outcome of the genericity validation. `orientation` records whether the
/// fold sign pattern (f_y(G+) < 0 < f_y(G-), f_xx(G+-) > 0) holds for the
/// system as given ("direct"), after the x -> -x flip ("flipped"), or not at
/// all ("violated").
struct ValidationReport {
    std::vector<ConditionResult> conditions;
    std::string orientation = "violated";
    bool all_pass = false;
};

namespace detail {

inline bool fold_sign_pattern(const SlowFastSystem& sys, const FoldPair& folds) {
    return sys.f_y(folds.G_plus.x, folds.G_plus.y, 0.0) < 0.0 &&
           sys.f_y(folds.G_minus.x, folds.G_minus.y, 0.0) > 0.0 &&
           sys.f_xx(folds.G_plus.x, folds.G_plus.y, 0.0) > 0.0 &&
           sys.f_xx(folds.G_minus.x, folds.G_minus.y, 0.0) > 0.0;
}

}  // namespace detail

/// Check the genericity conditions: positive slow speed, a single smooth
/// closed slow curve, containment in the open fundamental square, convexity,
/// nondegenerate branches, and nondegenerate folds with the normalized sign
/// pattern (directly or after the x-flip). Failures are report entries.
inline ValidationReport validate_genericity(const SlowFastSystem& sys, double tol_curve = 1e-12) {
    ValidationReport rep;
    auto push = [&](std::string name, bool pass, double measured, std::string detail = "") {
        rep.conditions.push_back({std::move(name), pass, measured, std::move(detail)});
    };

    // 1: g bounded away from zero.
    {
        double gmin = std::numeric_limits<double>::infinity();
        const int n = 160;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = -pi + two_pi * double(i) / n;
                const double y = -pi + two_pi * double(j) / n;
                gmin = std::min(gmin, sys.g(x, y, 0.0));
            }
        push("slow_speed_positive", gmin > 0.0, gmin);
    }

    // 2+3: one smooth closed curve, contained in the open square, convex.
    bool have_curve = false;
    FoldPair folds{};
    try {
        folds = find_folds(sys, tol_curve);
        have_curve = true;
        push("single_closed_curve", true, 0.0);
    } catch (const Error& e) {
        push("single_closed_curve", false, 0.0, e.what());
    }

    if (have_curve) {
        try {
            const SlowCurveModel curve(sys, folds, 512, tol_curve);
            double max_abs_x = std::max(std::abs(folds.sigma_plus()), std::abs(folds.sigma_minus()));
            const double max_abs_y =
                std::max(std::abs(folds.tau_plus()), std::abs(folds.tau_minus()));
            for (std::size_t i = 0; i < curve.sample_ys().size(); ++i) {
                max_abs_x = std::max(max_abs_x, std::abs(curve.sample_stable()[i]));
                max_abs_x = std::max(max_abs_x, std::abs(curve.sample_unstable()[i]));
            }
            const double extent = std::max(max_abs_x, max_abs_y);
            push("contained_in_fundamental_square", extent < pi - 1e-9, extent);

            // Convexity: sign-constancy of the turning along the closed polygon
            // (stable branch up, unstable branch down).
            std::vector<double> px, py;
            px.push_back(folds.sigma_plus());
            py.push_back(folds.tau_plus());
            for (std::size_t i = 0; i < curve.sample_ys().size(); ++i) {
                px.push_back(curve.sample_stable()[i]);
                py.push_back(curve.sample_ys()[i]);
            }
            px.push_back(folds.sigma_minus());
            py.push_back(folds.tau_minus());
            for (std::size_t i = curve.sample_ys().size(); i-- > 0;) {
                px.push_back(curve.sample_unstable()[i]);
                py.push_back(curve.sample_ys()[i]);
            }
            const std::size_t m = px.size();
            int pos = 0, neg = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t a = i, b = (i + 1) % m, c = (i + 2) % m;
                const double cross = (px[b] - px[a]) * (py[c] - py[b]) -
                                     (py[b] - py[a]) * (px[c] - px[b]);
                if (cross > 1e-12) ++pos;
                if (cross < -1e-12) ++neg;
            }
            push("convex", pos == 0 || neg == 0, double(std::min(pos, neg)));

            // 4: f_x bounded away from zero on M off the folds.
            double min_abs_fx = std::numeric_limits<double>::infinity();
            const double span = folds.tau_minus() - folds.tau_plus();
            for (std::size_t i = 0; i < curve.sample_ys().size(); ++i) {
                const double y = curve.sample_ys()[i];
                if (y - folds.tau_plus() < 0.05 * span || folds.tau_minus() - y < 0.05 * span)
                    continue;
                min_abs_fx = std::min(min_abs_fx,
                                      std::abs(sys.f_x(curve.sample_stable()[i], y, 0.0)));
                min_abs_fx = std::min(min_abs_fx,
                                      std::abs(sys.f_x(curve.sample_unstable()[i], y, 0.0)));
            }
            push("branches_nondegenerate", min_abs_fx > 1e-8, min_abs_fx);
        } catch (const Error& e) {
            push("contained_in_fundamental_square", false, 0.0, e.what());
            push("convex", false, 0.0, e.what());
            push("branches_nondegenerate", false, 0.0, e.what());
        }

        // 5: nondegenerate folds and the sign pattern, directly or flipped.
        const double fxx_p = sys.f_xx(folds.G_plus.x, folds.G_plus.y, 0.0);
        const double fxx_m = sys.f_xx(folds.G_minus.x, folds.G_minus.y, 0.0);
        const double fy_p = sys.f_y(folds.G_plus.x, folds.G_plus.y, 0.0);
        const double fy_m = sys.f_y(folds.G_minus.x, folds.G_minus.y, 0.0);
        const double min_mag = std::min(std::min(std::abs(fxx_p), std::abs(fxx_m)),
                                        std::min(std::abs(fy_p), std::abs(fy_m)));
        const bool nondeg = min_mag > 1e-8;
        push("folds_nondegenerate", nondeg, min_mag);
        if (nondeg) {
            if (detail::fold_sign_pattern(sys, folds)) {
                rep.orientation = "direct";
            } else {
                const XFlippedSystem flipped(
                    std::shared_ptr<const SlowFastSystem>(&sys, [](const SlowFastSystem*) {}));
                // The flip keeps fold y-positions and negates fold x-positions.
                const FoldPair ff{TorusPoint::reduced(-folds.G_plus.x, folds.G_plus.y),
                                  TorusPoint::reduced(-folds.G_minus.x, folds.G_minus.y)};
                if (detail::fold_sign_pattern(flipped, ff)) rep.orientation = "flipped";
            }
        }
        push("fold_sign_pattern", rep.orientation != "violated", 0.0, rep.orientation);
    } else {
        push("contained_in_fundamental_square", false, 0.0, "no slow curve");
        push("convex", false, 0.0, "no slow curve");
        push("branches_nondegenerate", false, 0.0, "no slow curve");
        push("folds_nondegenerate", false, 0.0, "no slow curve");
        push("fold_sign_pattern", false, 0.0, "no slow curve");
    }

    rep.all_pass = true;
    for (const auto& c : rep.conditions) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

/// Return the system itself or its x-flipped view so that downstream modules
/// always see the normalized fold sign pattern.
inline std::shared_ptr<const SlowFastSystem> normalize_orientation(
    std::shared_ptr<const SlowFastSystem> sys, double tol_curve = 1e-12) {
    const FoldPair folds = find_folds(*sys, tol_curve);
    if (detail::fold_sign_pattern(*sys, folds)) return sys;
    auto flipped = std::make_shared<XFlippedSystem>(sys);
    const FoldPair ff{TorusPoint::reduced(-folds.G_plus.x, folds.G_plus.y),
                      TorusPoint::reduced(-folds.G_minus.x, folds.G_minus.y)};
    if (!detail::fold_sign_pattern(*flipped, ff))
        throw NumericalError("normalize_orientation: fold sign pattern unresolvable by x-flip");
    return flipped;
}

}  // namespace canard
