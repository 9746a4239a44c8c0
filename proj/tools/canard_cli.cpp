// Command-line harness: genericity validation, return-map graphs, canard
// window search, property verification, balance/asymptotics reports and
// jump-height sweeps. All outputs are JSON or CSV under --out and embed the
// config hash, so identical configs give identical reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "canard/config.hpp"
#include "canard/reports.hpp"
#include "canard/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    double eps = 0.0;
    int n_min = 0, n_max = 0;
    unsigned jobs = 0;
    bool has_eps = false, has_n_min = false, has_n_max = false, has_jobs = false,
         has_out = false;
    std::string only;  // verify: comma-separated suite subset
};

canard::RunConfig effective_config(const CliOptions& opt) {
    canard::RunConfig cfg =
        opt.config_path.empty() ? canard::RunConfig{} : canard::load_config(opt.config_path);
    if (opt.has_eps) cfg.eps = opt.eps;
    if (opt.has_n_min) cfg.n_min = opt.n_min;
    if (opt.has_n_max) cfg.n_max = opt.n_max;
    if (opt.has_jobs) cfg.jobs = opt.jobs;
    if (opt.has_out) cfg.out_dir = opt.out_dir;
    return cfg;
}

std::filesystem::path out_file(const canard::RunConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out_dir) / name;
}

int cmd_validate(const canard::RunConfig& cfg) {
    const auto sys = canard::make_system(cfg);
    const canard::ValidationReport rep = canard::validate_genericity(*sys, cfg.tol.curve);
    nlohmann::json j = canard::validation_to_json(rep);
    j["meta"] = canard::report_meta(cfg);
    canard::write_text(out_file(cfg, "validation.json"), j.dump(2) + "\n");
    for (const auto& c : rep.conditions)
        std::printf("%-36s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL");
    std::printf("orientation: %s\n", rep.orientation.c_str());
    return rep.all_pass ? kExitOk : kExitPropertyFailure;
}

int cmd_graph(const canard::RunConfig& cfg) {
    canard::VerifyContext ctx(cfg);
    const auto samples = ctx.map->graph_sample(cfg.eps);
    canard::write_text(out_file(cfg, "graph.csv"), canard::graph_to_csv(samples));
    const canard::CanardSegments segs = ctx.map->canard_segments(cfg.eps);
    nlohmann::json j = canard::landmarks_to_json(ctx.map->landmarks(cfg.eps, segs), segs);
    j["eps"] = cfg.eps;
    j["meta"] = canard::report_meta(cfg);
    canard::write_text(out_file(cfg, "landmarks.json"), j.dump(2) + "\n");
    std::printf("graph: %zu samples at eps=%g -> %s\n", samples.size(), cfg.eps,
                out_file(cfg, "graph.csv").c_str());
    return kExitOk;
}

int cmd_windows(const canard::RunConfig& cfg) {
    canard::VerifyContext ctx(cfg);
    std::vector<canard::WindowRecord> windows =
        canard::locate_windows(*ctx.map, cfg.n_min, cfg.n_max, cfg.eps_grid_min, cfg.eps_grid_max,
                               cfg.eps_floor);
    nlohmann::json j;
    j["meta"] = canard::report_meta(cfg);
    j["windows"] = nlohmann::json::array();
    for (const auto& w : windows) j["windows"].push_back(canard::window_to_json(w));
    const canard::ScalingReport scaling = canard::scaling_report(windows);
    j["scaling"] = canard::scaling_to_json(scaling);
    canard::write_text(out_file(cfg, "windows.json"), j.dump(2) + "\n");
    canard::write_text(out_file(cfg, "scaling.csv"), canard::scaling_to_csv(scaling));
    for (const auto& w : windows)
        std::printf("window n=%d: [%0.12g, %0.12g] width %.3e\n", w.n, w.alpha, w.beta,
                    w.width());
    return kExitOk;
}

int cmd_verify(const canard::RunConfig& cfg, const std::string& only) {
    canard::VerifyContext ctx(cfg);
    const auto selected = [&](const std::string& name) {
        return only.empty() || only.find(name) != std::string::npos;
    };
    std::vector<canard::SuiteResult> suites;
    if (selected("shape")) suites.push_back(canard::verify_shape(ctx));
    if (selected("monotonicity")) suites.push_back(canard::verify_monotonicity(ctx));
    if (selected("convexity")) suites.push_back(canard::verify_convexity(ctx));
    if (selected("balance")) suites.push_back(canard::verify_balance_and_jump(ctx));
    if (selected("derivative")) suites.push_back(canard::verify_entry_exit_constant(ctx));

    nlohmann::json j;
    j["meta"] = canard::report_meta(cfg);
    j["suites"] = nlohmann::json::array();
    bool all = true;
    for (const auto& s : suites) {
        nlohmann::json js{{"suite", s.suite}, {"pass", s.pass()}, {"seconds", s.seconds}};
        js["checks"] = nlohmann::json::array();
        for (const auto& c : s.checks) {
            js["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            std::printf("%s %s/%s %s\n", c.pass ? "pass" : "FAIL", s.suite.c_str(),
                        c.name.c_str(), c.detail.c_str());
        }
        all = all && s.pass();
        j["suites"].push_back(js);
    }
    j["all_pass"] = all;
    canard::write_text(out_file(cfg, "verify.json"), j.dump(2) + "\n");
    return all ? kExitOk : kExitPropertyFailure;
}

int cmd_balance(const canard::RunConfig& cfg) {
    canard::VerifyContext ctx(cfg);
    const canard::BalanceData bal = canard::balance_point(*ctx.map);
    nlohmann::json j;
    j["meta"] = canard::report_meta(cfg);
    j["y_balance"] = bal.y_balance;
    j["I"] = bal.I;
    nlohmann::json phi = nlohmann::json::array();
    const auto& geom = ctx.geom;
    for (int i = 1; i < 24; ++i) {
        const double y =
            geom.alpha_plus + (geom.alpha_minus - geom.alpha_plus) * double(i) / 24.0;
        phi.push_back({{"y", y},
                       {"phi_plus", canard::phi_plus(*ctx.map, y)},
                       {"phi_minus", canard::phi_minus(*ctx.map, y)}});
    }
    j["phi"] = phi;

    // Asymptotics of the entry map and of the slow-manifold error.
    const canard::DerivativeAsymptotics da =
        canard::derivative_asymptotics(*ctx.map, {0.2, 0.1, 0.05, 0.025});
    nlohmann::json entry = nlohmann::json::array();
    for (const auto& s : da.samples)
        entry.push_back(
            {{"eps", s.eps}, {"products", s.products}, {"x_spread", s.x_spread}});
    j["entry_derivative"] = {{"samples", entry}, {"fitted_constant", da.fitted_constant}};
    const double cap = std::pow(geom.delta_plus, 3.0) * 0.98;
    const double lo = std::max(cfg.eps_floor, cap / 2.4);
    const canard::SlowManifoldErrorFit sm =
        canard::slow_manifold_error(*ctx.map, canard::geometric_grid(lo, cap, 5));
    nlohmann::json fold = nlohmann::json::array();
    for (const auto& s : sm.samples) fold.push_back({{"eps", s.eps}, {"max_error", s.max_error}});
    j["fold_error"] = {{"samples", fold}, {"exponent", sm.exponent}};

    canard::write_text(out_file(cfg, "balance.json"), j.dump(2) + "\n");
    std::printf("balance point y = %.12g, I = %.12g\n", bal.y_balance, bal.I);
    return kExitOk;
}

int cmd_sweep(const canard::RunConfig& cfg) {
    canard::VerifyContext ctx(cfg);
    const canard::CanardSegments segs = ctx.map->canard_segments(cfg.eps);
    std::vector<std::tuple<double, double, canard::JumpDirection>> rows;
    const int n = 33;
    for (int i = 1; i < n; ++i) {
        const double x0 = segs.p_plus + segs.width_plus() * double(i) / double(n);
        try {
            const canard::JumpResult jr =
                canard::jump_height(*ctx.map, cfg.eps, x0, cfg.tube_halfwidth);
            rows.emplace_back(x0, jr.y_plus, jr.direction);
        } catch (const canard::NeverExits&) {
            rows.emplace_back(x0, ctx.geom.tau_minus(), canard::JumpDirection::Up);
        }
    }
    canard::write_text(out_file(cfg, "sweep.csv"), canard::sweep_to_csv(rows));
    std::printf("sweep: %zu canard jumps at eps=%g -> %s\n", rows.size(), cfg.eps,
                out_file(cfg, "sweep.csv").c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for canard cycles of slow-fast systems on the torus"};
    app.require_subcommand(1);
    CliOptions opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config path");
        sub->add_option("--out", opt.out_dir, "output directory")
            ->each([&](const std::string&) { opt.has_out = true; });
        sub->add_option("--jobs", opt.jobs, "parallel workers (0 = hardware)")
            ->each([&](const std::string&) { opt.has_jobs = true; });
        return sub;
    };
    const auto add_eps = [&](CLI::App* sub) {
        sub->add_option("--eps", opt.eps, "time-scale parameter")
            ->each([&](const std::string&) { opt.has_eps = true; });
        return sub;
    };

    auto* validate = add_common(app.add_subcommand("validate", "check the genericity conditions"));
    auto* graph = add_eps(add_common(app.add_subcommand("graph", "emit return-map graph data")));
    auto* windows = add_common(app.add_subcommand("windows", "locate canard windows"));
    windows->add_option("--n-min", opt.n_min, "smallest window index")
        ->each([&](const std::string&) { opt.has_n_min = true; });
    windows->add_option("--n-max", opt.n_max, "largest window index")
        ->each([&](const std::string&) { opt.has_n_max = true; });
    auto* verify = add_common(app.add_subcommand("verify", "run the property suites"));
    verify->add_option("--only", opt.only,
                       "comma-separated subset: shape,monotonicity,convexity,balance,derivative");
    auto* balance = add_common(app.add_subcommand("balance", "entry-exit balance report"));
    auto* sweep = add_eps(add_common(app.add_subcommand("sweep", "jump-height sweep across D+")));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfigError : kExitOk;
    }

    try {
        const canard::RunConfig cfg = effective_config(opt);
        if (validate->parsed()) return cmd_validate(cfg);
        if (graph->parsed()) return cmd_graph(cfg);
        if (windows->parsed()) return cmd_windows(cfg);
        if (verify->parsed()) return cmd_verify(cfg, opt.only);
        if (balance->parsed()) return cmd_balance(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
    } catch (const canard::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const canard::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitConfigError;
}
