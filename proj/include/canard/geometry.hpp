#pragma once

#include "canard/errors.hpp"
#include "canard/slow_curve.hpp"
#include "canard/system.hpp"

namespace canard {

/// Cross-sections and entry/exit segments around the fold points:
/// Gamma = {y = -pi}, Gamma^+- = {y = alpha^+-} with alpha^+ = tau^+ + delta_+
/// and alpha^- = tau^- - delta_-, J^+ = [sigma^+, pi] on Gamma^+ and
/// J^- = [-pi, sigma^-] on Gamma^-.
struct SectionGeometry {
    FoldPair folds;
    double delta_plus = 0.0;
    double delta_minus = 0.0;
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    static constexpr double gamma_base = -pi;

    double sigma_plus() const { return folds.sigma_plus(); }
    double sigma_minus() const { return folds.sigma_minus(); }
    double tau_plus() const { return folds.tau_plus(); }
    double tau_minus() const { return folds.tau_minus(); }

    double j_plus_lo() const { return folds.sigma_plus(); }
    double j_plus_hi() const { return pi; }
    double j_minus_lo() const { return -pi; }
    double j_minus_hi() const { return folds.sigma_minus(); }
};

/// Build the section geometry for a normalized system. Negative deltas select
/// the default 0.15 * (tau^- - tau^+). The sections must lie strictly inside
/// the slow strip and the J segments must separate the two branches.
inline SectionGeometry make_section_geometry(const SlowFastSystem& sys, double delta_plus = -1.0,
                                             double delta_minus = -1.0,
                                             double tol_curve = 1e-12) {
    SectionGeometry geom;
    geom.folds = find_folds(sys, tol_curve);
    const double span = geom.folds.tau_minus() - geom.folds.tau_plus();
    geom.delta_plus = delta_plus > 0.0 ? delta_plus : 0.15 * span;
    geom.delta_minus = delta_minus > 0.0 ? delta_minus : 0.15 * span;
    geom.alpha_plus = geom.folds.tau_plus() + geom.delta_plus;
    geom.alpha_minus = geom.folds.tau_minus() - geom.delta_minus;
    if (!(geom.folds.tau_plus() < geom.alpha_plus && geom.alpha_plus < geom.alpha_minus &&
          geom.alpha_minus < geom.folds.tau_minus()))
        throw ConfigError("section geometry: need tau+ < alpha+ < alpha- < tau-");

    // J^+ must cross the unstable branch and avoid the stable one; J^- the
    // mirror statement.
    const SlowCurveModel curve(sys, geom.folds, 256, tol_curve);
    const double su_p = curve.unstable(geom.alpha_plus);
    const double ss_p = curve.stable(geom.alpha_plus);
    if (!(su_p > geom.j_plus_lo() && su_p < geom.j_plus_hi()) ||
        (ss_p >= geom.j_plus_lo() && ss_p <= geom.j_plus_hi()))
        throw ConfigError("section geometry: J+ does not separate the branches");
    const double ss_m = curve.stable(geom.alpha_minus);
    const double su_m = curve.unstable(geom.alpha_minus);
    if (!(ss_m > geom.j_minus_lo() && ss_m < geom.j_minus_hi()) ||
        (su_m >= geom.j_minus_lo() && su_m <= geom.j_minus_hi()))
        throw ConfigError("section geometry: J- does not separate the branches");
    return geom;
}

}  // namespace canard
