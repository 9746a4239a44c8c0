#include <gtest/gtest.h>

#include <cmath>

#include "canard/genericity.hpp"
#include "canard/wayinout.hpp"
#include "canard/windows.hpp"
#include "support/lab.hpp"

using namespace canard;

namespace {
const testsupport::Lab& lab() { return testsupport::default_lab(); }
const ReturnMap& ret() { return *lab().map; }

const WindowRecord& window6() {
    static const WindowRecord w = [] {
        auto ws = locate_windows(ret(), 6, 6, 0.04, 0.3);
        if (ws.size() != 1) throw std::runtime_error("window 6 not located");
        return ws.front();
    }();
    return w;
}
}  // namespace

TEST(CornerGap, CornerArithmetic) {
    const double eps = 0.11;
    const CanardSegments s = ret().canard_segments(eps);
    const double gEm = corner_gap(ret(), eps, Corner::EMinus);
    const double gEp = corner_gap(ret(), eps, Corner::EPlus);
    EXPECT_NEAR(gEm - gEp, s.width_plus() + s.width_minus(), 1e-12);
    EXPECT_GT(gEm, gEp);
}

TEST(CornerGap, OrderedAcrossLandmarksInsideWindow) {
    const double eps = 0.1637;  // inside the window of index 6
    const double gEp = corner_gap(ret(), eps, Corner::EPlus);
    const double gAp = corner_gap(ret(), eps, Corner::APlus);
    const double gBp = corner_gap(ret(), eps, Corner::BPlus);
    const double gBm = corner_gap(ret(), eps, Corner::BMinus);
    const double gAm = corner_gap(ret(), eps, Corner::AMinus);
    const double gEm = corner_gap(ret(), eps, Corner::EMinus);
    EXPECT_LT(gEp, gAp);
    EXPECT_LT(gAp, gBp);
    EXPECT_LT(gBp, gBm);
    EXPECT_LT(gBm, gAm);
    EXPECT_LT(gAm, gEm);
}

TEST(CornerGap, DecreasingWithSteepeningSlope) {
    std::vector<double> eps_grid = geometric_grid(0.05, 0.35, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (const double eps : eps_grid) {
        const double g = corner_gap(ret(), eps, Corner::EMinus);
        EXPECT_LT(g, prev);
        prev = g;
    }
    const double h = 0.002;
    const auto fd = [&](double e) {
        return std::abs(corner_gap(ret(), e + h, Corner::EMinus) -
                        corner_gap(ret(), e - h, Corner::EMinus)) /
               (2 * h);
    };
    EXPECT_GE(fd(0.05), 3.0 * fd(0.3));
}

TEST(CornerGap, ScaledGapApproachesConstant) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const double eps : {0.03, 0.045, 0.06}) {
        const double v = eps * corner_gap(ret(), eps, Corner::EMinus);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_LT(hi / lo - 1.0, 0.20);
}

TEST(FindWindow, LocatesIndexSixWindow) {
    const WindowRecord& w = window6();
    EXPECT_EQ(w.n, 6);
    EXPECT_NEAR(w.alpha, 0.15990542190772, 1e-8);
    EXPECT_NEAR(w.beta, 0.16743010244577, 1e-8);
    ASSERT_TRUE(w.c_minus.has_value());
    ASSERT_TRUE(w.c_plus.has_value());
    // Interior ordering: alpha < C+ < C- < beta (in eps).
    EXPECT_LT(w.alpha, w.c_plus->first);
    EXPECT_LT(w.c_plus->first, w.c_plus->second);
    EXPECT_LT(w.c_plus->second, w.c_minus->first);
    EXPECT_LT(w.c_minus->first, w.c_minus->second);
    EXPECT_LT(w.c_minus->second, w.beta);
}

TEST(FindWindow, StableCanardBandCensus) {
    const WindowRecord& w = window6();
    ASSERT_EQ(w.census_samples.size(), 10u);
    for (const auto& [eps, c] : w.census_samples) {
        EXPECT_EQ(c.regime, 3) << "at eps=" << eps;
        ASSERT_EQ(c.cycles.size(), 2u);
        int stable = 0;
        for (const auto& cyc : c.cycles) {
            EXPECT_TRUE(cyc.hyperbolic);
            EXPECT_TRUE(cyc.canard);
            stable += cyc.stable ? 1 : 0;
        }
        EXPECT_EQ(stable, 1);
    }
}

TEST(FindWindow, WidthCoherentWithGapSlope) {
    // Mean-value relation: (beta - alpha) * |gap slope| matches the segment
    // widths at alpha within the slope variation across the window.
    const WindowRecord& w = window6();
    const CanardSegments s = ret().canard_segments(w.alpha);
    const double h = 1e-4;
    const double mid = 0.5 * (w.alpha + w.beta);
    const double slope = std::abs(corner_gap(ret(), mid + h, Corner::EMinus) -
                                  corner_gap(ret(), mid - h, Corner::EMinus)) /
                         (2 * h);
    const double predicted = (s.width_plus() + s.width_minus()) / slope;
    EXPECT_NEAR(w.width(), predicted, 0.25 * predicted);
}

TEST(FindWindow, RejectsWindowBelowFloor) {
    EXPECT_THROW(find_window(ret(), 6, {0.12, 0.2}, /*eps_floor=*/0.2), WindowBelowFloor);
}

TEST(FindWindow, RejectsInvalidBracket) {
    EXPECT_THROW(find_window(ret(), 6, {0.25, 0.3}), BracketInvalid);
}

TEST(Census, RegimeSequenceSweepingDownThroughWindow) {
    const WindowRecord& w = window6();
    const double half = 0.5 * w.width();
    const std::vector<double> eps_samples{
        w.beta + half,
        0.5 * (w.c_minus->second + w.beta),
        0.5 * (w.c_minus->first + w.c_minus->second),
        0.5 * (w.c_plus->second + w.c_minus->first),
        0.5 * (w.c_plus->first + w.c_plus->second),
        0.5 * (w.alpha + w.c_plus->first),
        w.alpha - half,
    };
    const std::vector<int> expected{1, 2, 3, 5, 3, 2, 1};
    for (std::size_t i = 0; i < eps_samples.size(); ++i) {
        const CensusResult c = census(ret(), eps_samples[i]);
        EXPECT_EQ(c.regime, expected[i]) << "at eps=" << eps_samples[i];
    }
}

TEST(Census, NoCycleRegimeHasFractionalRotation) {
    const WindowRecord& w = window6();
    const double eps = 0.5 * (w.c_plus->second + w.c_minus->first);
    const CensusResult c = census(ret(), eps);
    ASSERT_EQ(c.regime, 5);
    EXPECT_TRUE(c.cycles.empty());
    const double rho = ret().rotation_number(eps, 48);
    EXPECT_GT(rho, 6.0);
    EXPECT_LT(rho, 7.0);
}

TEST(Census, IntegerRotationBetweenWindows) {
    const CensusResult c = census(ret(), 0.152);
    EXPECT_EQ(c.regime, 1);
    ASSERT_EQ(c.cycles.size(), 2u);
    const double rho = ret().rotation_number(0.152, 24);
    EXPECT_DOUBLE_EQ(rho, double(c.cycles.front().winding_n));
}

TEST(Scaling, SingleWindowInsufficientForFits) {
    const ScalingReport rep = scaling_report({window6()});
    EXPECT_FALSE(rep.sufficient);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_EQ(rep.rows.front().n, 6);
}

namespace {

/// Slow speed without the half-turn symmetry of the built-in family.
struct SkewSpeed final : SlowFastSystem {
    CosineOvalFamily base{1.5, 0.0};
    double f(double x, double y, double e) const override { return base.f(x, y, e); }
    double g(double x, double y, double) const override { return 1.0 + 0.3 * std::sin(x - y); }
    double f_x(double x, double y, double e) const override { return base.f_x(x, y, e); }
    double f_y(double x, double y, double e) const override { return base.f_y(x, y, e); }
    double f_xx(double x, double y, double e) const override { return base.f_xx(x, y, e); }
    double g_x(double x, double y, double) const override { return 0.3 * std::cos(x - y); }
    std::string name() const override { return "skew-speed"; }
};

}  // namespace

TEST(AsymmetricSpeed, WindowMachineryWithoutSymmetry) {
    const auto raw = std::make_shared<SkewSpeed>();
    EXPECT_TRUE(validate_genericity(*raw).all_pass);
    const auto sys = normalize_orientation(raw);
    const SectionGeometry geom = make_section_geometry(*sys);
    const ReturnMap map(*sys, geom);

    // The entry and exit segments now genuinely differ.
    const CanardSegments segs = map.canard_segments(0.15);
    EXPECT_GT(segs.width_plus(), 0.0);
    EXPECT_GT(segs.width_minus(), 0.0);
    EXPECT_LT(segs.width_plus() / segs.width_minus(), 0.9);

    // The balance point ignores the slow speed entirely (time
    // reparametrization does not move it).
    const BalanceData bal = balance_point(map);
    EXPECT_NEAR(bal.y_balance, 0.0, 1e-8);
    EXPECT_NEAR(bal.I, 1.17799076512919476, 1e-9);

    const auto ws = locate_windows(map, 6, 6, 0.04, 0.3);
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_LT(ws[0].alpha, ws[0].beta);
    for (const auto& [eps, c] : ws[0].census_samples) {
        EXPECT_EQ(c.regime, 3) << "at eps=" << eps;
        EXPECT_EQ(c.cycles.size(), 2u);
    }
}
