#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gdapl/gda.hpp"
#include "gdapl/objective.hpp"
#include "gdapl/params.hpp"
#include "gdapl/verify.hpp"

namespace gdapl {

using Json = nlohmann::ordered_json;

inline constexpr const char* tool_name = "gdapl";
inline constexpr const char* tool_version = "1.0.0";

/// Non-finite doubles become strings so the document stays valid JSON.
inline Json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline Json to_json(Point p) { return Json::array({num(p.x), num(p.y)}); }

inline Json to_json(const Mat2& m) {
    return Json::array({Json::array({num(m.m11), num(m.m12)}), Json::array({num(m.m21), num(m.m22)})});
}

inline Json to_json(const ModelParams& p) {
    Json j;
    j["gamma"] = p.gamma;
    j["a"] = p.a;
    j["b"] = p.b;
    j["mu"] = p.mu;
    j["kappa"] = p.kappa;
    j["alpha"] = p.alpha;
    j["lambda_min"] = p.lambda_min;
    j["lambda_max"] = p.lambda_max;
    j["r_phi_half"] = p.r_phi_half;
    j["R_outer"] = p.R_outer;
    j["r_core"] = p.r_core;
    j["R_domain"] = p.R_domain;
    return j;
}

inline Json to_json(const PLReport& r) {
    Json j;
    j["grid"] = {{"N", r.grid_n}, {"half_width", r.half_width}, {"center", to_json(r.center)},
                 {"extrema", "grid minima/maxima, not continuous ones"}};
    j["C_x"] = num(r.C_x);
    j["C_y"] = num(r.C_y);
    j["constants"] = {{"C_x", num(r.C_x)}, {"C_y", num(r.C_y)}, {"C", num(r.C())},
                      {"argmax_x", to_json(r.argmax_x)}, {"argmax_y", to_json(r.argmax_y)}};
    Json v = Json::array();
    for (const auto& x : r.violations)
        v.push_back({{"point", to_json(x.p)}, {"ratio", num(x.ratio)}, {"side", std::string(1, x.side)}});
    j["violations"] = v;
    j["excluded"] = r.excluded();
    j["excluded_x"] = r.excluded_x;
    j["excluded_y"] = r.excluded_y;
    j["failures"] = r.failures;
    j["row_min_modulus"] = num(r.row_min_modulus);
    j["col_max_modulus"] = num(r.col_max_modulus);
    j["min_grad_norm"] = {{"value", num(r.min_grad_norm)}, {"excluding_radius", r.grad_exclusion}};
    j["min_dxx_on_XMinus"] = num(r.min_dxx_on_XMinus);
    j["max_dyy_on_XPlus"] = num(r.max_dyy_on_XPlus);
    return j;
}

inline Json to_json(const IdentityReport& r) {
    Json ids;
    for (const auto& i : r.identities)
        ids[i.name] = {{"max_rel_err", num(i.max_rel_err)}, {"threshold", i.threshold},
                       {"samples", i.samples}, {"pass", i.pass}};
    return ids;
}

inline Json to_json(const SpectrumReport& r) {
    Json j;
    j["jacobian"] = to_json(r.jacobian);
    j["eigenvalues"] = Json::array({{{"re", r.eig1.real()}, {"im", r.eig1.imag()}},
                                    {{"re", r.eig2.real()}, {"im", r.eig2.imag()}}});
    j["max_real_part"] = r.max_real_part;
    j["symmetric_part"] = to_json(r.symmetric_part);
    return j;
}

inline Json to_json(const PeriodReport& r) {
    return {{"z0", to_json(r.z0)},
            {"g0", num(r.g0)},
            {"max_g_drift_rel", num(r.max_g_drift_rel)},
            {"period_T", num(r.period_T)},
            {"return_distance", num(r.return_distance)},
            {"return_point", to_json(r.return_point)},
            {"section", r.section}};
}

inline Json to_json(const ConvergenceReport& r) {
    return {{"z0", to_json(r.z0)},
            {"predicted_rate", -r.predicted_rate},
            {"fit_rate", num(r.fit_rate)},
            {"final_norm", num(r.final_norm)},
            {"degenerate", r.degenerate},
            {"samples", r.norms.size()}};
}

/// Report document: tool/version/command/params, then the command's payload
/// keys, then the pass/fail summary. Key order is fixed.
inline Json make_envelope(const std::string& command, const ModelParams& params, const Json& payload,
                          bool passed, const Json& failed_checks = Json::array()) {
    Json j;
    j["tool"] = tool_name;
    j["version"] = tool_version;
    j["command"] = command;
    j["params"] = to_json(params);
    for (auto it = payload.begin(); it != payload.end(); ++it) j[it.key()] = it.value();
    j["summary"] = {{"passed", passed}, {"failed_checks", failed_checks}};
    return j;
}

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open report path " + path);
    f << j.dump(2) << '\n';
}

}  // namespace gdapl
