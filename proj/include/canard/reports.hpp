#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "canard/config.hpp"
#include "canard/genericity.hpp"
#include "canard/retmap.hpp"
#include "canard/wayinout.hpp"
#include "canard/windows.hpp"

namespace canard {

inline constexpr const char* kToolName = "canard";
inline constexpr const char* kToolVersion = "0.1.0";

inline nlohmann::json report_meta(const RunConfig& cfg) {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", config_hash(cfg)}};
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

inline nlohmann::json validation_to_json(const ValidationReport& rep) {
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& c : rep.conditions)
        conditions.push_back({{"name", c.name},
                              {"pass", c.pass},
                              {"measured", c.measured},
                              {"detail", c.detail}});
    return {{"conditions", conditions},
            {"orientation", rep.orientation},
            {"all_pass", rep.all_pass}};
}

inline nlohmann::json cycles_to_json(const std::vector<CycleRecord>& cycles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cycles)
        arr.push_back({{"x_fixed", c.x_fixed},
                       {"winding_n", c.winding_n},
                       {"log_multiplier", c.log_multiplier},
                       {"stable", c.stable},
                       {"hyperbolic", c.hyperbolic},
                       {"canard", c.canard}});
    return arr;
}

inline nlohmann::json census_to_json(const CensusResult& c) {
    nlohmann::json j{{"regime", c.regime}, {"cycles", cycles_to_json(c.cycles)}};
    if (c.n_active) j["n_active"] = *c.n_active;
    return j;
}

inline nlohmann::json window_to_json(const WindowRecord& w) {
    nlohmann::json j{{"n", w.n}, {"alpha", w.alpha}, {"beta", w.beta}, {"width", w.width()}};
    if (w.c_minus) j["c_minus"] = {w.c_minus->first, w.c_minus->second};
    if (w.c_plus) j["c_plus"] = {w.c_plus->first, w.c_plus->second};
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& [eps, res] : w.census_samples) {
        nlohmann::json entry = census_to_json(res);
        entry["eps"] = eps;
        cs.push_back(entry);
    }
    j["census"] = cs;
    return j;
}

inline nlohmann::json landmarks_to_json(const GraphLandmarks& lm, const CanardSegments& segs) {
    const auto pt = [](const LiftedPoint& p) { return nlohmann::json{p.x, p.y}; };
    nlohmann::json j{{"A_minus", pt(lm.A_minus)},
                     {"A_plus", pt(lm.A_plus)},
                     {"E_minus", pt(lm.E_minus)},
                     {"E_plus", pt(lm.E_plus)},
                     {"u0", lm.u0},
                     {"segments",
                      {{"p_plus", segs.p_plus},
                       {"q_plus", segs.q_plus},
                       {"p_minus", segs.p_minus},
                       {"q_minus", segs.q_minus},
                       {"width_plus", segs.width_plus()},
                       {"width_minus", segs.width_minus()}}}};
    if (lm.B_minus) j["B_minus"] = pt(*lm.B_minus);
    if (lm.B_plus) j["B_plus"] = pt(*lm.B_plus);
    return j;
}

inline std::string graph_to_csv(const std::vector<GraphSample>& samples) {
    std::string out = "x_lifted,Px_lifted,logJ\n";
    for (const auto& s : samples)
        out += format_double(s.x) + "," + format_double(s.Px) + "," +
               format_double(s.log_jacobian) + "\n";
    return out;
}

inline std::string scaling_to_csv(const ScalingReport& rep) {
    std::string out = "n,alpha,beta,width\n";
    for (const auto& r : rep.rows)
        out += std::to_string(r.n) + "," + format_double(r.alpha) + "," + format_double(r.beta) +
               "," + format_double(r.width) + "\n";
    return out;
}

inline nlohmann::json scaling_to_json(const ScalingReport& rep) {
    nlohmann::json j{{"sufficient", rep.sufficient}};
    if (rep.sufficient) {
        j["log_width_fit"] = {{"slope", rep.log_width_vs_n.slope},
                              {"intercept", rep.log_width_vs_n.intercept},
                              {"r_squared", rep.log_width_vs_n.r_squared}};
        j["alpha_n_median"] = rep.alpha_n_median;
        j["alpha_n_spread"] = rep.alpha_n_spread;
    } else {
        j["note"] = "insufficient data: fits need at least 3 windows";
    }
    return j;
}

inline std::string sweep_to_csv(const std::vector<std::tuple<double, double, JumpDirection>>& rows) {
    std::string out = "x0,y_plus,direction\n";
    for (const auto& [x0, y_plus, dir] : rows)
        out += format_double(x0) + "," + format_double(y_plus) + "," +
               (dir == JumpDirection::Down ? "down" : "up") + "\n";
    return out;
}

}  // namespace canard
