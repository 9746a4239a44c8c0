#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "canard/config.hpp"
#include "canard/fitting.hpp"
#include "canard/genericity.hpp"
#include "canard/slow_curve.hpp"
#include "canard/system.hpp"
#include "support/lab.hpp"

using namespace canard;

TEST(EvalField, ClosedFormValues) {
    const CosineOvalFamily f15(1.5, 0.0);
    const FieldValues a = eval_field(f15, {0.0, 0.0}, 0.0);
    EXPECT_DOUBLE_EQ(a.f, 0.5);
    EXPECT_DOUBLE_EQ(a.g, 1.0);

    const FieldValues b = eval_field(f15, TorusPoint::reduced(pi, pi), 0.0);
    EXPECT_NEAR(b.f, -3.5, 1e-15);
    EXPECT_DOUBLE_EQ(b.g, 1.0);

    const CosineOvalFamily f12(1.2, 0.3);
    const FieldValues c = eval_field(f12, {pi / 2, pi / 2}, 0.0);
    EXPECT_NEAR(c.f, -1.2, 1e-15);
    EXPECT_NEAR(c.g, 1.3, 1e-15);
}

TEST(EvalField, PeriodicInBothAngles) {
    const CosineOvalFamily sys(1.4, 0.25);
    Rng rng(401);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-8.0, 8.0);
        const double y = rng.uniform(-8.0, 8.0);
        const double eps = rng.uniform(0.0, 0.4);
        EXPECT_NEAR(sys.f(x, y, eps), sys.f(x + two_pi, y + two_pi, eps), 1e-13);
        EXPECT_NEAR(sys.g(x, y, eps), sys.g(x - two_pi, y + two_pi, eps), 1e-13);
        EXPECT_NEAR(sys.f_x(x, y, eps), sys.f_x(x + two_pi, y, eps), 1e-13);
        EXPECT_NEAR(sys.f_y(x, y, eps), sys.f_y(x, y - two_pi, eps), 1e-13);
        EXPECT_NEAR(sys.f_xx(x, y, eps), sys.f_xx(x + two_pi, y, eps), 1e-13);
        EXPECT_NEAR(sys.g_x(x, y, eps), sys.g_x(x + two_pi, y - two_pi, eps), 1e-13);
    }
}

TEST(FlippedView, PartialsMatchFiniteDifferences) {
    const auto base = std::make_shared<CosineOvalFamily>(1.3, 0.2);
    const XFlippedSystem sys(base);
    const double h = 1e-6, x = 0.7, y = -0.4, eps = 0.1;
    EXPECT_NEAR(sys.f_x(x, y, eps), (sys.f(x + h, y, eps) - sys.f(x - h, y, eps)) / (2 * h), 1e-9);
    EXPECT_NEAR(sys.f_y(x, y, eps), (sys.f(x, y + h, eps) - sys.f(x, y - h, eps)) / (2 * h), 1e-9);
    EXPECT_NEAR(sys.f_xx(x, y, eps),
                (sys.f_x(x + h, y, eps) - sys.f_x(x - h, y, eps)) / (2 * h), 1e-9);
    EXPECT_NEAR(sys.g_x(x, y, eps), (sys.g(x + h, y, eps) - sys.g(x - h, y, eps)) / (2 * h), 1e-9);
}

TEST(FindFolds, ClosedFormPositions) {
    const CosineOvalFamily f15(1.5);
    const FoldPair p15 = find_folds(f15);
    EXPECT_NEAR(p15.G_plus.x, 0.0, 1e-10);
    EXPECT_NEAR(p15.G_plus.y, -pi / 3, 1e-10);
    EXPECT_NEAR(p15.G_minus.x, 0.0, 1e-10);
    EXPECT_NEAR(p15.G_minus.y, pi / 3, 1e-10);

    const CosineOvalFamily f12(1.2);
    const FoldPair p12 = find_folds(f12);
    const double tau = std::acos(0.2);
    EXPECT_NEAR(p12.G_plus.y, -tau, 1e-10);
    EXPECT_NEAR(p12.G_minus.y, tau, 1e-10);

    // Residuals at both points below the curve tolerance.
    for (const auto& G : {p15.G_plus, p15.G_minus}) {
        EXPECT_LT(std::abs(f15.f(G.x, G.y, 0.0)), 1e-12);
        EXPECT_LT(std::abs(f15.f_x(G.x, G.y, 0.0)), 1e-12);
    }
}

TEST(FindFolds, EmptySlowCurve) {
    const CosineOvalFamily sys(2.5);
    EXPECT_THROW(find_folds(sys), NoFolds);
}

TEST(SlowCurve, ClosedFormOracle) {
    const CosineOvalFamily sys(1.5);
    const SlowCurveModel curve = compute_slow_curve(sys, 512);
    // Branch with f_x < 0 is x = +arccos(k - cos y), the other its mirror.
    for (double y : {-0.9, -0.5, 0.0, 0.4, 0.8}) {
        const double exact = std::acos(1.5 - std::cos(y));
        EXPECT_NEAR(curve.stable(y), exact, 1e-11);
        EXPECT_NEAR(curve.unstable(y), -exact, 1e-11);
    }
    EXPECT_NEAR(curve.stable(0.0), pi / 3, 1e-11);
    EXPECT_NEAR(curve.unstable(0.0), -pi / 3, 1e-11);
}

TEST(SlowCurve, BranchesMergeAtFolds) {
    const CosineOvalFamily sys(1.5);
    const SlowCurveModel curve = compute_slow_curve(sys, 512);
    for (double y : {-(pi / 3 - 1e-6), pi / 3 - 1e-6}) {
        EXPECT_LT(std::abs(curve.stable(y)), 2e-3);
        EXPECT_LT(std::abs(curve.unstable(y)), 2e-3);
    }
}

TEST(SlowCurve, BranchStabilityLabels) {
    const CosineOvalFamily sys(1.5);
    const SlowCurveModel curve = compute_slow_curve(sys, 256);
    for (std::size_t i = 0; i < curve.sample_ys().size(); ++i) {
        const double y = curve.sample_ys()[i];
        EXPECT_LT(sys.f_x(curve.sample_stable()[i], y, 0.0), 0.0);
        EXPECT_GT(sys.f_x(curve.sample_unstable()[i], y, 0.0), 0.0);
    }
}

TEST(SlowCurve, QueriesOutsideStripRejected) {
    const CosineOvalFamily sys(1.5);
    const SlowCurveModel curve = compute_slow_curve(sys, 128);
    EXPECT_THROW(curve.stable(2.0), OutOfStrip);
    EXPECT_THROW(curve.unstable(-1.5), OutOfStrip);
}

TEST(Genericity, DefaultFamilyPassesAfterFlip) {
    const CosineOvalFamily sys(1.5);
    const ValidationReport rep = validate_genericity(sys);
    EXPECT_TRUE(rep.all_pass);
    EXPECT_EQ(rep.orientation, "flipped");
}

TEST(Genericity, WideOvalStillConvex) {
    // At k = 0.5 the oval leaves the concavity region of the cosine but the
    // curvature keeps one sign; the validator reports this numerically.
    const CosineOvalFamily sys(0.5);
    const ValidationReport rep = validate_genericity(sys);
    EXPECT_TRUE(rep.all_pass);
    for (const auto& c : rep.conditions)
        if (c.name == "contained_in_fundamental_square") {
            EXPECT_NEAR(c.measured, 2 * pi / 3, 1e-6);
        }
}

namespace {

/// Slow speed that vanishes on a vertical circle; violates positivity.
struct VanishingSpeed final : SlowFastSystem {
    CosineOvalFamily base{1.5, 0.0};
    double f(double x, double y, double e) const override { return base.f(x, y, e); }
    double g(double x, double, double) const override { return std::cos(x); }
    double f_x(double x, double y, double e) const override { return base.f_x(x, y, e); }
    double f_y(double x, double y, double e) const override { return base.f_y(x, y, e); }
    double f_xx(double x, double y, double e) const override { return base.f_xx(x, y, e); }
    double g_x(double x, double, double) const override { return -std::sin(x); }
    std::string name() const override { return "vanishing-speed"; }
};

}  // namespace

TEST(Genericity, VanishingSlowSpeedFails) {
    const VanishingSpeed sys;
    const ValidationReport rep = validate_genericity(sys);
    EXPECT_FALSE(rep.all_pass);
    bool found = false;
    for (const auto& c : rep.conditions)
        if (c.name == "slow_speed_positive") {
            found = true;
            EXPECT_FALSE(c.pass);
            EXPECT_LE(c.measured, 0.0);
        }
    EXPECT_TRUE(found);
}

TEST(Genericity, NormalizedFoldSigns) {
    const auto& lab = testsupport::Lab(1.5);
    const auto& folds = lab.geom.folds;
    const auto& sys = *lab.sys;
    EXPECT_LT(sys.f_y(folds.G_plus.x, folds.G_plus.y, 0.0), 0.0);
    EXPECT_GT(sys.f_y(folds.G_minus.x, folds.G_minus.y, 0.0), 0.0);
    EXPECT_GT(sys.f_xx(folds.G_plus.x, folds.G_plus.y, 0.0), 0.0);
    EXPECT_GT(sys.f_xx(folds.G_minus.x, folds.G_minus.y, 0.0), 0.0);
    EXPECT_LT(folds.tau_plus(), folds.tau_minus());
}

TEST(Geometry, SectionsInsideSlowStrip) {
    const auto& lab = testsupport::default_lab();
    EXPECT_LT(lab.geom.tau_plus(), lab.geom.alpha_plus);
    EXPECT_LT(lab.geom.alpha_plus, lab.geom.alpha_minus);
    EXPECT_LT(lab.geom.alpha_minus, lab.geom.tau_minus());
    EXPECT_NEAR(lab.geom.delta_plus, 0.15 * (2 * pi / 3), 1e-9);
}

TEST(Geometry, OversizedDeltaRejected) {
    const auto& lab = testsupport::default_lab();
    EXPECT_THROW(make_section_geometry(*lab.sys, 1.2, 1.2), ConfigError);
}

TEST(Config, DefaultsAndOverrides) {
    const RunConfig def = config_from_json(nlohmann::json::object());
    EXPECT_DOUBLE_EQ(def.k, 1.5);
    EXPECT_DOUBLE_EQ(def.g_amp, 0.0);
    EXPECT_EQ(def.scan.n_scan, 256);
    EXPECT_DOUBLE_EQ(def.tol.fix, 1e-9);

    const RunConfig c = config_from_json(nlohmann::json{
        {"k", 1.3},
        {"tolerances", {{"fix", 1e-8}}},
        {"integrator", {{"rel_tol", 1e-9}}},
    });
    EXPECT_DOUBLE_EQ(c.k, 1.3);
    EXPECT_DOUBLE_EQ(c.tol.fix, 1e-8);
    EXPECT_DOUBLE_EQ(c.integrator.rel_tol, 1e-9);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_THROW(config_from_json(nlohmann::json{{"family", "cosine_oval"}, {"kk", 1.5}}),
                 ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"tolerances", {{"fixx", 1e-8}}}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"family", "pendulum"}}), ConfigError);
}

TEST(Config, IllTypedValuesRejected) {
    EXPECT_THROW(config_from_json(nlohmann::json{{"k", "high"}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"jobs", -3}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"seed", -1}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"n_min", 0}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"eps", -0.1}}), ConfigError);
}

TEST(Config, MalformedFileReported) {
    const auto path = std::filesystem::temp_directory_path() / "canard_bad_config.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    EXPECT_THROW(load_config(path.string()), ConfigError);
    std::filesystem::remove(path);
}

TEST(Config, HashTracksContent) {
    RunConfig a, b;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.k = 1.51;
    EXPECT_NE(config_hash(a), config_hash(b));
}
