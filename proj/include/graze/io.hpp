// CSV and JSON output: curve/branch/scan files, flat JSON records, and the
// run manifest written alongside every output set.
#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "graze/config.hpp"
#include "graze/continuation.hpp"
#include "graze/errors.hpp"
#include "graze/mps.hpp"
#include "graze/scan.hpp"
#include "graze/theory.hpp"

namespace graze {

inline constexpr const char* artifact_version = "0.1.0";

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    return out;
}

} // namespace detail

/// Provenance and reproduction record written alongside every output set.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config; ///< resolved key-value map
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    std::string version = artifact_version;
};

inline nlohmann::json to_json(const RunManifest& m) {
    return nlohmann::json{{"command", m.command},
                          {"config", m.config},
                          {"outputs", m.outputs},
                          {"wall_time_s", m.wall_time_s},
                          {"version", m.version}};
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
    auto out = detail::open_out(path);
    out << to_json(m).dump(2) << "\n";
}

inline RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.wall_time_s = j.value("wall_time_s", 0.0);
    m.version = j.value("version", "");
    return m;
}

/// Flat JSON record of an MPS solution; complex multipliers as re/im pairs.
inline nlohmann::json to_json(const MpsSolution& s) {
    nlohmann::json crossings = nlohmann::json::array();
    for (const auto& c : s.crossings) crossings.push_back({{"x", c.x}, {"z", c.z}});
    nlohmann::json viol = nlohmann::json::array();
    for (int j : s.admissible.violations) viol.push_back(j);
    return nlohmann::json{
        {"p", s.p},
        {"y_imp", s.impact.y_imp},
        {"z_imp", s.impact.z_imp},
        {"mu", s.params.mu},
        {"eta", s.params.eta},
        {"residual", s.residual},
        {"crossings", crossings},
        {"trace_T", s.stability.trace_T},
        {"det_D", s.stability.det_D},
        {"multiplier1", {{"re", s.stability.multipliers[0].real()},
                         {"im", s.stability.multipliers[0].imag()}}},
        {"multiplier2", {{"re", s.stability.multipliers[1].real()},
                         {"im", s.stability.multipliers[1].imag()}}},
        {"test_sn", s.stability.test_sn},
        {"test_pd", s.stability.test_pd},
        {"admissible", s.admissible.admissible},
        {"violations", viol},
    };
}

/// CoeffSet as JSON with per-field provenance tags.
inline nlohmann::json to_json(const CoeffSet& c, const std::string& provenance) {
    auto f = [&](double v) { return nlohmann::json{{"value", v}, {"provenance", provenance}}; };
    return nlohmann::json{
        {"p", c.p},
        {"omega", f(c.omega)},
        {"alpha", f(c.alpha)},
        {"beta", f(c.beta)},
        {"gamma", f(c.gamma)},
        {"phi", f(c.phi)},
        {"kappa_p", f(c.kappa_p)},
        {"kappa_p_prime", f(c.kappa_p_prime)},
        {"a12_prime", f(c.a12_prime)},
        {"xi_p", f(c.xi_p)},
        {"s_plus", f(c.s_plus)},
        {"s_minus", f(c.s_minus)},
        {"c_sn", f(c.c_sn)},
        {"c_pd", f(c.c_pd)},
        {"E_p", f(c.E_p)},
        {"lossless", c.lossless},
    };
}

/// Curve CSV: header kind,p,mu,eta,amp,omega,y_imp,z_imp,residual.
inline void write_curve_csv(const std::string& path, const CurveSample& c) {
    auto out = detail::open_out(path);
    out << "kind,p,mu,eta,amp,omega,y_imp,z_imp,residual\n";
    for (const auto& pt : c.points) {
        out << to_string(c.kind) << ',' << c.p << ',' << detail::fmt_g17(pt.mu) << ','
            << detail::fmt_g17(pt.eta) << ',' << detail::fmt_g17(pt.amp) << ','
            << detail::fmt_g17(pt.omega) << ',' << detail::fmt_g17(pt.y_imp) << ','
            << detail::fmt_g17(pt.z_imp) << ',' << detail::fmt_g17(pt.residual) << '\n';
    }
}

/// Curve metadata JSON: fitted coefficient with uncertainty plus the seed
/// and configuration snapshot.
inline nlohmann::json curve_metadata(const CurveSample& c, const nlohmann::json& config_snapshot) {
    return nlohmann::json{{"kind", to_string(c.kind)},
                          {"p", c.p},
                          {"n_points", c.points.size()},
                          {"fitted_c", c.fitted_c},
                          {"fitted_c_stderr", c.fitted_c_stderr},
                          {"n_fit", c.n_fit},
                          {"termination", c.termination},
                          {"config", config_snapshot}};
}

/// Branch CSV: one row per accepted sample.
inline void write_branch_csv(const std::string& path, const BranchResult& b,
                             const HybridSystemDef& sys) {
    auto out = detail::open_out(path);
    out << "p,mu,eta,amp,omega,y_imp,z_imp,residual,test_sn,test_pd,admissible\n";
    for (const auto& s : b.samples) {
        const double om = sys.omega_of(s.sol.params);
        const double amp = sys.has_closed_form() ? sys.osc(s.sol.params).amp : s.sol.params.mu;
        out << s.sol.p << ',' << detail::fmt_g17(s.sol.params.mu) << ','
            << detail::fmt_g17(s.sol.params.eta) << ',' << detail::fmt_g17(amp) << ','
            << detail::fmt_g17(om) << ',' << detail::fmt_g17(s.sol.impact.y_imp) << ','
            << detail::fmt_g17(s.sol.impact.z_imp) << ',' << detail::fmt_g17(s.sol.residual) << ','
            << detail::fmt_g17(s.has_tests ? s.sol.stability.test_sn : std::nan("")) << ','
            << detail::fmt_g17(s.has_tests ? s.sol.stability.test_pd : std::nan("")) << ','
            << (s.sol.admissible.admissible ? 1 : 0) << '\n';
    }
}

inline nlohmann::json to_json(const BifurcationRecord& r, const HybridSystemDef& sys) {
    const double om = sys.omega_of(r.params);
    nlohmann::json j{{"kind", to_string(r.kind)},
                     {"p", r.p},
                     {"mu", r.params.mu},
                     {"eta", r.params.eta},
                     {"omega", om},
                     {"y_imp", r.impact.y_imp},
                     {"z_imp", r.impact.z_imp},
                     {"refinement_residual", r.refinement_residual},
                     {"trigger", r.trigger == BifTrigger::test_function ? "test_function"
                                 : r.trigger == BifTrigger::impact_velocity
                                     ? "impact_velocity"
                                     : "interior_crossing"}};
    if (sys.has_closed_form()) j["amp"] = sys.osc(r.params).amp;
    return j;
}

/// Scan CSV: amp,x_section,impacted per recorded point.
inline void write_scan_csv(const std::string& path, const std::vector<OrbitDiagramRow>& rows) {
    auto out = detail::open_out(path);
    out << "amp,x_section,impacted\n";
    for (const auto& row : rows)
        for (const auto& rec : row.records)
            out << detail::fmt_g17(row.amp) << ',' << detail::fmt_g17(rec.x) << ','
                << (rec.impacted ? 1 : 0) << '\n';
}

/// Scan sidecar JSON with the sampling configuration and seed.
inline nlohmann::json scan_sidecar(const ScanConfig& sc) {
    return nlohmann::json{{"n_initial", sc.n_initial},
                          {"n_transient", sc.n_transient},
                          {"n_record", sc.n_record},
                          {"seed", sc.seed},
                          {"box", {{"x", {sc.box_x_lo, sc.box_x_hi}},
                                   {"y", {sc.box_y_lo, sc.box_y_hi}},
                                   {"z", {0.0, two_pi}}}},
                          {"period_cap", sc.period_cap},
                          {"period_tol", sc.period_tol},
                          {"threads", sc.threads}};
}

} // namespace graze
