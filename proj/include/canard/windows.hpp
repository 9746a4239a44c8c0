#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canard/fitting.hpp"
#include "canard/retmap.hpp"

namespace canard {

enum class Corner { EMinus, EPlus, AMinus, APlus, BMinus, BPlus };

inline const char* to_string(Corner c) {
    switch (c) {
        case Corner::EMinus: return "E-";
        case Corner::EPlus: return "E+";
        case Corner::AMinus: return "A-";
        case Corner::APlus: return "A+";
        case Corner::BMinus: return "B-";
        case Corner::BPlus: return "B+";
    }
    return "?";
}

/// Lifted gap (y - x) of a landmark point. The lift is anchored by the
/// transit construction itself (segment endpoints carry their winding; graph
/// heights are reduced into the window of D-), so gaps are positive in the
/// working range, grow as eps decreases, and depend continuously on eps.
inline double corner_gap(const ReturnMap& map, double eps, Corner which) {
    const CanardSegments segs = map.canard_segments(eps);
    switch (which) {
        case Corner::EMinus: return segs.q_minus - segs.p_plus;
        case Corner::EPlus: return segs.p_minus - segs.q_plus;
        default: break;
    }
    const double anchor = segs.mid_minus();
    const auto graph_gap = [&](double x) {
        return reduce_near(map.poincare_map(eps, x).x_out, anchor) - x;
    };
    switch (which) {
        case Corner::AMinus: return graph_gap(segs.p_plus);
        case Corner::APlus: return graph_gap(segs.q_plus);
        case Corner::BMinus:
            return graph_gap(
                map.slope_one_point(eps, segs, map.maximal_canard(eps, segs), true));
        case Corner::BPlus:
            return graph_gap(
                map.slope_one_point(eps, segs, map.maximal_canard(eps, segs), false));
        default: break;
    }
    throw ConfigError("corner_gap: unknown landmark");
}

struct CensusResult {
    int regime = 0;                  // 1..5
    std::optional<int> n_active;     // branch whose diagonal meets the rectangle
    std::vector<CycleRecord> cycles;
};

/// Classify the relative position of the diagonal and the graph at this eps
/// and attach the full cycle records.
inline CensusResult census(const ReturnMap& map, double eps) {
    CensusResult out;
    const CanardSegments segs = map.canard_segments(eps);
    const GraphLandmarks lm = map.landmarks(eps, segs);
    const double gEm = lm.E_minus.y - lm.E_minus.x;
    const double gEp = lm.E_plus.y - lm.E_plus.x;

    // Integer branches whose diagonal crosses the rectangle K.
    const int n_lo = int(std::ceil(gEp / two_pi - 1e-15));
    const int n_hi = int(std::floor(gEm / two_pi + 1e-15));
    out.cycles = map.fixed_points(eps);
    if (n_lo > n_hi) {
        out.regime = 1;
        return out;
    }
    int n = n_lo;
    if (n_hi > n_lo) {  // pick the branch nearest the rectangle center
        const double center = 0.5 * (gEm + gEp) / two_pi;
        for (int m = n_lo + 1; m <= n_hi; ++m)
            if (std::abs(m - center) < std::abs(n - center)) n = m;
    }
    out.n_active = n;
    const double target = two_pi * double(n);

    const double tol_tangent = map.tolerances().tangent;
    if (lm.B_minus && std::abs((lm.B_minus->y - lm.B_minus->x) - target) < tol_tangent) {
        out.regime = 4;
        return out;
    }
    if (lm.B_plus && std::abs((lm.B_plus->y - lm.B_plus->x) - target) < tol_tangent) {
        out.regime = 4;
        return out;
    }

    bool stable_in_dplus = false;
    for (const auto& c : out.cycles) {
        if (!c.stable) continue;
        const double xr = reduce_near(c.x_fixed, segs.mid_plus());
        if (xr >= segs.p_plus && xr <= segs.q_plus) stable_in_dplus = true;
    }
    if (stable_in_dplus)
        out.regime = 3;
    else if (out.cycles.empty())
        out.regime = 5;  // diagonal threads between the two slope-one points
    else
        out.regime = 2;
    return out;
}

struct WindowRecord {
    int n = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<std::pair<double, double>> c_minus;  // stable-canard band, lower part
    std::optional<std::pair<double, double>> c_plus;   // stable-canard band, upper part
    std::vector<std::pair<double, CensusResult>> census_samples;

    double width() const { return beta - alpha; }
};

namespace detail {

inline double bisect_gap(const ReturnMap& map, Corner which, double target, double lo, double hi,
                         double rel_tol) {
    auto fn = [&](double eps) { return corner_gap(map, eps, which) - target; };
    double flo = fn(lo), fhi = fn(hi);
    if (std::signbit(flo) == std::signbit(fhi))
        throw BracketInvalid(std::string("find_window: gap(") + to_string(which) +
                             ") not bracketed");
    for (int i = 0; i < 200 && (hi - lo) > rel_tol * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Locate the canard window for branch n: the eps interval on which the
/// diagonal of branch n crosses the rectangle K, together with the two
/// sub-intervals carrying a stable canard cycle. The bracket must straddle
/// the gap(E-) = 2 pi n crossing.
inline WindowRecord find_window(const ReturnMap& map, int n, std::pair<double, double> bracket,
                                double eps_floor = 0.02, int census_per_band = 5) {
    WindowRecord rec;
    rec.n = n;
    const double target = two_pi * double(n);
    rec.beta = detail::bisect_gap(map, Corner::EMinus, target, bracket.first, bracket.second, 1e-14);
    // alpha can sit below the scan cell that bracketed beta; expand downward.
    double lo = std::min(bracket.first, rec.beta * 0.98);
    while (corner_gap(map, lo, Corner::EPlus) < target) {
        lo *= 0.85;
        if (lo < 0.25 * eps_floor)
            throw WindowBelowFloor("find_window: lower window edge below the eps floor");
    }
    rec.alpha = detail::bisect_gap(map, Corner::EPlus, target, lo, rec.beta, 1e-14);
    if (!(rec.alpha < rec.beta)) throw NumericalError("find_window: alpha >= beta");
    if (rec.alpha < eps_floor)
        throw WindowBelowFloor("find_window: window extends below the eps floor");

    // Corner-gap values order as E+ < A+ < B+ < B- < A- < E- at fixed eps, so
    // all four inner crossings are bracketed by [alpha, beta].
    try {
        const double eBm = detail::bisect_gap(map, Corner::BMinus, target, rec.alpha, rec.beta, 1e-12);
        const double eAm = detail::bisect_gap(map, Corner::AMinus, target, rec.alpha, rec.beta, 1e-12);
        rec.c_minus = {eBm, eAm};
        const double eAp = detail::bisect_gap(map, Corner::APlus, target, rec.alpha, rec.beta, 1e-12);
        const double eBp = detail::bisect_gap(map, Corner::BPlus, target, rec.alpha, rec.beta, 1e-12);
        rec.c_plus = {eAp, eBp};
    } catch (const SlopeOneNotFound&) {
        // Slope-one landmarks can vanish at large eps; the window itself stands.
    }

    const auto sample_band = [&](const std::pair<double, double>& band) {
        for (int i = 0; i < census_per_band; ++i) {
            const double t = double(i + 1) / double(census_per_band + 1);
            const double e = band.first + t * (band.second - band.first);
            rec.census_samples.emplace_back(e, census(map, e));
        }
    };
    if (rec.c_minus) sample_band(*rec.c_minus);
    if (rec.c_plus) sample_band(*rec.c_plus);
    return rec;
}

/// Scan the working range and locate every window with index in
/// [n_min, n_max]. Returns records sorted by n (increasing; eps decreasing).
inline std::vector<WindowRecord> locate_windows(const ReturnMap& map, int n_min, int n_max,
                                                double eps_lo, double eps_hi,
                                                double eps_floor = 0.02, int scan_points = 72) {
    const auto grid = geometric_grid(eps_lo, eps_hi, std::size_t(scan_points));
    std::vector<double> gaps(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        gaps[i] = corner_gap(map, grid[i], Corner::EMinus);
    std::vector<WindowRecord> out;
    for (int n = n_min; n <= n_max; ++n) {
        const double target = two_pi * double(n);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            // gaps decrease along the grid; find the straddling pair.
            if ((gaps[i] - target) * (gaps[i + 1] - target) <= 0.0 && gaps[i] != target) {
                out.push_back(find_window(map, n, {grid[i], grid[i + 1]}, eps_floor));
                break;
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const WindowRecord& a, const WindowRecord& b) { return a.n < b.n; });
    return out;
}

struct ScalingReport {
    struct Row {
        int n;
        double alpha, beta, width;
    };
    std::vector<Row> rows;
    bool sufficient = false;          // need >= 3 windows for the fits
    LinearFit log_width_vs_n;         // ln|R_n| = -C n + const (slope = -C)
    double alpha_n_median = 0.0;      // median of alpha_n * n
    double alpha_n_spread = 0.0;      // max relative deviation from the median
};

inline ScalingReport scaling_report(const std::vector<WindowRecord>& windows) {
    ScalingReport rep;
    for (const auto& w : windows) rep.rows.push_back({w.n, w.alpha, w.beta, w.width()});
    if (rep.rows.size() < 3) return rep;
    rep.sufficient = true;
    std::vector<double> ns, lnw, an;
    for (const auto& r : rep.rows) {
        ns.push_back(double(r.n));
        lnw.push_back(std::log(r.width));
        an.push_back(r.alpha * double(r.n));
    }
    rep.log_width_vs_n = fit_linear(ns, lnw);
    std::vector<double> sorted = an;
    std::sort(sorted.begin(), sorted.end());
    rep.alpha_n_median = sorted[sorted.size() / 2];
    for (double v : an)
        rep.alpha_n_spread =
            std::max(rep.alpha_n_spread, std::abs(v - rep.alpha_n_median) / rep.alpha_n_median);
    return rep;
}

}  // namespace canard
