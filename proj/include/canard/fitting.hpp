#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "canard/errors.hpp"

namespace canard {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares for y = slope * x + intercept.
inline LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw NumericalError("fit_linear: need >= 2 matched samples");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw NumericalError("fit_linear: degenerate abscissae");
    LinearFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (out.slope * xs[i] + out.intercept);
        ss_res += r * r;
    }
    out.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return out;
}

/// Bisection for fn(x) = 0 on [lo, hi]. The bracket must carry a sign change;
/// opposite signs at the bracket ends are maintained (and asserted) at every
/// step. Stops when the bracket is below xtol or |fn| below ftol.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi, double xtol,
                     double ftol = 0.0, int max_iter = 200) {
    double flo = fn(lo), fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw NoBracket("bisect: no sign change over bracket");
    for (int i = 0; i < max_iter && (hi - lo) > xtol; ++i) {
        if (std::signbit(flo) == std::signbit(fhi))
            throw BracketInvalid("bisect: bracket lost sign change");
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (!std::isfinite(fm)) throw NonFiniteState("bisect: non-finite evaluation");
        if (fm == 0.0 || (ftol > 0.0 && std::abs(fm) < ftol)) return mid;
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

/// Adaptive Simpson quadrature on [a, b] (a < b or a > b both allowed).
inline double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                               double tol, int max_depth = 40) {
    if (a == b) return 0.0;
    const auto simpson = [](double fa, double fm, double fb, double h) {
        return h / 6.0 * (fa + 4.0 * fm + fb);
    };
    struct Frame {
        double a, b, fa, fm, fb, whole;
        int depth;
    };
    const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    std::vector<Frame> stack{{a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), 0}};
    double total = 0.0;
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        const double m = 0.5 * (fr.a + fr.b);
        const double lm = fn(0.5 * (fr.a + m)), rm = fn(0.5 * (m + fr.b));
        const double left = simpson(fr.fa, lm, fr.fm, m - fr.a);
        const double right = simpson(fr.fm, rm, fr.fb, fr.b - m);
        const double err = left + right - fr.whole;
        if (fr.depth >= max_depth || std::abs(err) < 15.0 * tol) {
            total += left + right + err / 15.0;
        } else {
            stack.push_back({fr.a, m, fr.fa, lm, fr.fm, left, fr.depth + 1});
            stack.push_back({m, fr.b, fr.fm, rm, fr.fb, right, fr.depth + 1});
        }
    }
    return total;
}

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double r = std::log(hi / lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(r * double(i));
    return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return out;
}

/// SplitMix64, used for reproducible sample-point selection. The sequence is
/// fully determined by the seed and identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace canard
