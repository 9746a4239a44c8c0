#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>

#include "canard/angles.hpp"
#include "canard/errors.hpp"

namespace canard {

/// Slow-fast vector field on the torus,
///
///     x' = f(x, y, eps),   y' = eps * g(x, y, eps),
///
/// evaluated through analytic values and partial derivatives. Implementations
/// must be 2*pi-periodic in both angles and keep g > 0 on the working range.
/// All evaluations are const and safe to call concurrently.
class SlowFastSystem {
public:
    virtual ~SlowFastSystem() = default;

    virtual double f(double x, double y, double eps) const = 0;
    virtual double g(double x, double y, double eps) const = 0;
    virtual double f_x(double x, double y, double eps) const = 0;
    virtual double f_y(double x, double y, double eps) const = 0;
    virtual double f_xx(double x, double y, double eps) const = 0;
    /// x-derivative of g; needed by the variational equation of the
    /// y-parametrized flow. Zero for x-independent slow speeds.
    virtual double g_x(double x, double y, double eps) const = 0;

    virtual std::string name() const = 0;
    virtual std::map<std::string, double> params() const { return {}; }
};

/// Field values at a point (fast component, slow speed).
struct FieldValues {
    double f = 0.0;
    double g = 0.0;
};

inline FieldValues eval_field(const SlowFastSystem& sys, TorusPoint p, double eps) {
    return {sys.f(p.x, p.y, eps), sys.g(p.x, p.y, eps)};
}

/// Built-in family
///
///     f = cos x + cos y - k,      g = 1 + g_amp * cos(x - y).
///
/// For k in (1, 2) the slow curve is the closed convex oval
/// cos x + cos y = k with fold points at x = 0, y = -+ arccos(k - 1),
/// and both branches have the closed form x = -+ arccos(k - cos y).
class CosineOvalFamily final : public SlowFastSystem {
public:
    explicit CosineOvalFamily(double k = 1.5, double g_amp = 0.0) : k_(k), g_amp_(g_amp) {
        if (!(k > 0.0)) throw ConfigError("cosine_oval: k must be positive");
        if (!(g_amp >= 0.0 && g_amp <= 0.9))
            throw ConfigError("cosine_oval: g_amp must lie in [0, 0.9]");
    }

    double f(double x, double y, double) const override { return std::cos(x) + std::cos(y) - k_; }
    double g(double x, double y, double) const override {
        return 1.0 + g_amp_ * std::cos(x - y);
    }
    double f_x(double x, double, double) const override { return -std::sin(x); }
    double f_y(double, double y, double) const override { return -std::sin(y); }
    double f_xx(double x, double, double) const override { return -std::cos(x); }
    double g_x(double x, double y, double) const override {
        return -g_amp_ * std::sin(x - y);
    }

    std::string name() const override { return "cosine_oval"; }
    std::map<std::string, double> params() const override {
        return {{"k", k_}, {"g_amp", g_amp_}};
    }

    double k() const { return k_; }
    double g_amp() const { return g_amp_; }

private:
    double k_;
    double g_amp_;
};

/// View of a base system with the x-axis reversed, u = -x. Used by the
/// genericity validator to normalize the sign pattern at the fold points;
/// the flip preserves f_x pointwise and negates f_y, f_xx and g_x.
class XFlippedSystem final : public SlowFastSystem {
public:
    explicit XFlippedSystem(std::shared_ptr<const SlowFastSystem> base) : base_(std::move(base)) {}

    double f(double x, double y, double eps) const override { return -base_->f(-x, y, eps); }
    double g(double x, double y, double eps) const override { return base_->g(-x, y, eps); }
    double f_x(double x, double y, double eps) const override { return base_->f_x(-x, y, eps); }
    double f_y(double x, double y, double eps) const override { return -base_->f_y(-x, y, eps); }
    double f_xx(double x, double y, double eps) const override { return -base_->f_xx(-x, y, eps); }
    double g_x(double x, double y, double eps) const override { return -base_->g_x(-x, y, eps); }

    std::string name() const override { return base_->name() + " (x-flipped)"; }
    std::map<std::string, double> params() const override { return base_->params(); }

    const SlowFastSystem& base() const { return *base_; }

private:
    std::shared_ptr<const SlowFastSystem> base_;
};

}  // namespace canard
