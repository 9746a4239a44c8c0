#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "canard/errors.hpp"
#include "canard/integrate.hpp"
#include "canard/retmap.hpp"
#include "canard/system.hpp"

namespace canard {

/// Full description of a run. A run is reproducible from its config alone;
/// reports embed the hash of the canonical serialization.
struct RunConfig {
    std::string family = "cosine_oval";
    double k = 1.5;
    double g_amp = 0.0;
    double delta_plus = -1.0;   // <= 0: default 0.15 * (tau- - tau+)
    double delta_minus = -1.0;

    Tolerances tol;
    IntegratorConfig integrator;
    ScanConfig scan;

    double eps_floor = 0.02;
    double eps_max = 0.5;
    double eps = 0.1;           // single-eps commands (graph, sweep)
    double eps_grid_min = 0.04;
    double eps_grid_max = 0.3;
    int eps_grid_count = 24;

    int n_min = 5;
    int n_max = 8;
    double tube_halfwidth = 0.1;
    int rotation_iterations = 32;

    std::string out_dir = "out";
    std::uint64_t seed = 20240901;
    unsigned jobs = 0;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) ok = true;
        if (!ok) throw ConfigError("config: unknown key \"" + item.key() + "\" in " + where);
    }
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j);

namespace detail {
inline RunConfig config_from_json_checked(const nlohmann::json& j);
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    try {
        return detail::config_from_json_checked(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline RunConfig detail::config_from_json_checked(const nlohmann::json& j) {
    RunConfig c;
    detail::reject_unknown(
        j,
        {"family", "k", "g_amp", "delta_plus", "delta_minus", "tolerances", "integrator", "scan",
         "eps_floor", "eps_max", "eps", "eps_grid", "n_min", "n_max", "tube_halfwidth",
         "rotation_iterations", "out_dir", "seed", "jobs"},
        "top level");
    detail::read_into(j, "family", c.family);
    if (c.family != "cosine_oval")
        throw ConfigError("config: unknown family \"" + c.family + "\"");
    detail::read_into(j, "k", c.k);
    detail::read_into(j, "g_amp", c.g_amp);
    detail::read_into(j, "delta_plus", c.delta_plus);
    detail::read_into(j, "delta_minus", c.delta_minus);
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        detail::reject_unknown(t, {"curve", "fix", "hyp", "slope", "tangent", "quadrature"},
                               "tolerances");
        detail::read_into(t, "curve", c.tol.curve);
        detail::read_into(t, "fix", c.tol.fix);
        detail::read_into(t, "hyp", c.tol.hyp);
        detail::read_into(t, "slope", c.tol.slope);
        detail::read_into(t, "tangent", c.tol.tangent);
        detail::read_into(t, "quadrature", c.tol.quadrature);
    }
    if (j.contains("integrator")) {
        const auto& t = j.at("integrator");
        detail::reject_unknown(t, {"rel_tol", "abs_tol", "max_steps", "initial_step"},
                               "integrator");
        detail::read_into(t, "rel_tol", c.integrator.rel_tol);
        detail::read_into(t, "abs_tol", c.integrator.abs_tol);
        detail::read_into(t, "max_steps", c.integrator.max_steps);
        detail::read_into(t, "initial_step", c.integrator.initial_step);
        if (!(c.integrator.rel_tol > 0.0 && c.integrator.abs_tol > 0.0 &&
              c.integrator.max_steps > 0))
            throw ConfigError("config: integrator tolerances and step budget must be positive");
    }
    if (j.contains("scan")) {
        const auto& t = j.at("scan");
        detail::reject_unknown(t, {"n_scan", "n_refine"}, "scan");
        detail::read_into(t, "n_scan", c.scan.n_scan);
        detail::read_into(t, "n_refine", c.scan.n_refine);
    }
    if (j.contains("eps_grid")) {
        const auto& t = j.at("eps_grid");
        detail::reject_unknown(t, {"min", "max", "count"}, "eps_grid");
        detail::read_into(t, "min", c.eps_grid_min);
        detail::read_into(t, "max", c.eps_grid_max);
        detail::read_into(t, "count", c.eps_grid_count);
    }
    detail::read_into(j, "eps_floor", c.eps_floor);
    detail::read_into(j, "eps_max", c.eps_max);
    detail::read_into(j, "eps", c.eps);
    detail::read_into(j, "n_min", c.n_min);
    detail::read_into(j, "n_max", c.n_max);
    detail::read_into(j, "tube_halfwidth", c.tube_halfwidth);
    detail::read_into(j, "rotation_iterations", c.rotation_iterations);
    detail::read_into(j, "out_dir", c.out_dir);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() &&
            !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
            throw ConfigError("config: seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("jobs")) {
        const long long v = j.at("jobs").get<long long>();
        if (v < 0 || v > 1024) throw ConfigError("config: jobs must lie in [0, 1024]");
        c.jobs = unsigned(v);
    }
    if (!(c.eps > 0.0) || !(c.eps_floor > 0.0) || !(c.eps_max > c.eps_floor))
        throw ConfigError("config: eps range must satisfy 0 < eps_floor < eps_max");
    if (c.n_min < 1 || c.n_min > c.n_max)
        throw ConfigError("config: window indices must satisfy 1 <= n_min <= n_max");
    if (!(c.tube_halfwidth > 0.0) || c.rotation_iterations < 1 || c.scan.n_scan < 16 ||
        c.scan.n_refine < 16 || c.eps_grid_count < 2)
        throw ConfigError("config: tube, rotation, scan and grid sizes must be positive");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    return config_from_json(j);
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["family"] = c.family;
    j["k"] = c.k;
    j["g_amp"] = c.g_amp;
    j["delta_plus"] = c.delta_plus;
    j["delta_minus"] = c.delta_minus;
    j["tolerances"] = {{"curve", c.tol.curve},     {"fix", c.tol.fix},
                       {"hyp", c.tol.hyp},         {"slope", c.tol.slope},
                       {"tangent", c.tol.tangent}, {"quadrature", c.tol.quadrature}};
    j["integrator"] = {{"rel_tol", c.integrator.rel_tol},
                       {"abs_tol", c.integrator.abs_tol},
                       {"max_steps", c.integrator.max_steps},
                       {"initial_step", c.integrator.initial_step}};
    j["scan"] = {{"n_scan", c.scan.n_scan}, {"n_refine", c.scan.n_refine}};
    j["eps_floor"] = c.eps_floor;
    j["eps_max"] = c.eps_max;
    j["eps"] = c.eps;
    j["eps_grid"] = {{"min", c.eps_grid_min}, {"max", c.eps_grid_max}, {"count", c.eps_grid_count}};
    j["n_min"] = c.n_min;
    j["n_max"] = c.n_max;
    j["tube_halfwidth"] = c.tube_halfwidth;
    j["rotation_iterations"] = c.rotation_iterations;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    return j;
}

/// FNV-1a over the canonical serialization; embedded into every report.
/// The output directory and worker count do not affect any computed value
/// and are excluded.
inline std::string config_hash(const RunConfig& c) {
    RunConfig canonical = c;
    canonical.out_dir.clear();
    canonical.jobs = 0;
    const std::string s = config_to_json(canonical).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

inline std::shared_ptr<const SlowFastSystem> make_system(const RunConfig& c) {
    return std::make_shared<CosineOvalFamily>(c.k, c.g_amp);
}

}  // namespace canard
