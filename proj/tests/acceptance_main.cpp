// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code 0 only if all pass.

#include <array>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "canard/reports.hpp"
#include "canard/verify.hpp"
#include "support/reference_rk4.hpp"

using namespace canard;

namespace {

SuiteResult integrator_oracle(const VerifyContext& ctx) {
    return [&] {
        SuiteResult res;
        res.suite = "integrator-oracle";
        const auto t0 = std::chrono::steady_clock::now();

        Rng rng(ctx.cfg.seed);
        double worst_x = 0.0, worst_lj = 0.0;
        std::vector<std::array<double, 2>> cases(100);
        for (auto& c : cases) c = {rng.uniform(0.2, 0.5), rng.uniform(-pi, pi)};
        std::vector<double> dx(cases.size()), dlj(cases.size());
        parallel_for(cases.size(), ctx.cfg.jobs, [&](std::size_t i) {
            const auto [eps, x0] = cases[i];
            const TransitResult r = transit(*ctx.sys, eps, -pi, pi, x0, ctx.cfg.integrator);
            const auto ref = testsupport::rk4_reference(*ctx.sys, eps, -pi, pi, x0, 10 * r.steps);
            dx[i] = std::abs(r.x_lifted - ref.x_lifted);
            dlj[i] = std::abs(r.log_jacobian - ref.log_jacobian);
        });
        for (std::size_t i = 0; i < cases.size(); ++i) {
            worst_x = std::max(worst_x, dx[i]);
            worst_lj = std::max(worst_lj, dlj[i]);
        }
        res.checks.push_back({"matches-tenfold-fixed-step-reference",
                              worst_x < 1e-8 && worst_lj < 1e-6,
                              "worst |dx| = " + std::to_string(worst_x) +
                                  ", worst |dlogJ| = " + std::to_string(worst_lj)});

        double worst_fd = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double x0 = rng.uniform(-pi, pi);
            const double h = 1e-6;
            const double c = transit(*ctx.sys, 0.3, -pi, pi, x0, ctx.cfg.integrator).log_jacobian;
            const double p =
                transit(*ctx.sys, 0.3, -pi, pi, x0 + h, ctx.cfg.integrator).x_lifted;
            const double m =
                transit(*ctx.sys, 0.3, -pi, pi, x0 - h, ctx.cfg.integrator).x_lifted;
            const double fd = (p - m) / (2.0 * h);
            worst_fd = std::max(worst_fd, std::abs(std::exp(c) - fd) / std::abs(fd));
        }
        res.checks.push_back({"log-derivative-matches-finite-difference", worst_fd < 1e-3,
                              "worst relative error " + std::to_string(worst_fd)});

        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    }();
}

SuiteResult determinism_and_symmetry(const VerifyContext& ctx) {
    SuiteResult res = verify_symmetry(ctx);
    res.suite = "determinism-and-symmetry";
    const auto t0 = std::chrono::steady_clock::now();

    const auto produce = [&]() {
        VerifyContext fresh(ctx.cfg);
        const double eps = 0.12;
        const CanardSegments segs = fresh.map->canard_segments(eps);
        nlohmann::json j = landmarks_to_json(fresh.map->landmarks(eps, segs), segs);
        j["meta"] = report_meta(fresh.cfg);
        std::string out = j.dump(2);
        out += graph_to_csv(fresh.map->graph_sample(eps));
        const BalanceData bal = balance_point(*fresh.map);
        out += format_double(bal.y_balance) + "," + format_double(bal.I);
        return out;
    };
    const std::string first = produce();
    const std::string second = produce();
    res.checks.push_back({"reports-byte-identical-on-rerun", first == second,
                          first == second ? "" : "reports differ between reruns"});
    res.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace

int main() {
    RunConfig cfg;
    cfg.jobs = 4;
    const VerifyContext ctx(cfg);

    std::vector<SuiteResult> results;
    results.push_back(integrator_oracle(ctx));
    results.push_back(verify_shape(ctx));
    results.push_back(verify_monotonicity(ctx));
    results.push_back(verify_convexity(ctx));
    std::vector<WindowRecord> windows;
    results.push_back(verify_window_structure(ctx, windows));
    results.push_back(verify_window_scalings(windows));
    results.push_back(verify_balance_and_jump(ctx));
    results.push_back(verify_entry_exit_constant(ctx));
    results.push_back(verify_slow_manifold(ctx));
    results.push_back(determinism_and_symmetry(ctx));

    int failed_criteria = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::printf("%s  criterion %2zu  %-28s (%.1f s)\n", r.pass() ? "PASS" : "FAIL", i + 1,
                    r.suite.c_str(), r.seconds);
        for (const auto& c : r.checks)
            if (!c.pass) std::printf("      failed: %s  %s\n", c.name.c_str(), c.detail.c_str());
        failed_criteria += r.pass() ? 0 : 1;
    }
    std::printf("%zu of %zu criteria passed\n", results.size() - std::size_t(failed_criteria),
                results.size());
    return failed_criteria == 0 ? 0 : 1;
}
